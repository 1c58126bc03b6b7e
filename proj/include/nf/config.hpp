#pragma once

#include <string>

#include <json.hpp>

#include "nf/functions.hpp"
#include "nf/model.hpp"

namespace nf {

/// Model configuration file contents. Schema in docs/formats.md.
struct ModelConfig {
    MacroModel macro;
    int n = 1;
    PopulationPolicy policy;
    Profile initial = Profile::zero();
    int quadrature_order = 8;
};

/// Throws ErrorKind::schema naming the offending key path.
ModelConfig parse_model_config(const nlohmann::json& doc);

/// Reads and parses a file; syntax errors report line and column.
ModelConfig load_model_config(const std::string& path);

/// Parses JSON text, mapping syntax errors to ErrorKind::schema with line/column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

Profile parse_profile(const nlohmann::json& j, const std::string& path);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

} // namespace nf
