#include "nf/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nf/error.hpp"

namespace nf {

namespace {

using nlohmann::json;

Error schema_error(const std::string& path, const std::string& what)
{
    return {ErrorKind::schema, "config " + (path.empty() ? std::string("/") : path) + ": " + what};
}

const json& require(const json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object())
        throw schema_error(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        throw schema_error(path, "missing key '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& key, const std::string& path)
{
    const json& v = require(j, key, path);
    if (!v.is_number())
        throw schema_error(path + "/" + key, "expected a number");
    return v.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path)
{
    if (!j.is_object() || !j.contains(key))
        return fallback;
    return number(j, key, path);
}

int integer(const json& j, const std::string& key, const std::string& path)
{
    const json& v = require(j, key, path);
    if (!v.is_number_integer())
        throw schema_error(path + "/" + key, "expected an integer");
    return v.get<int>();
}

std::string kind_of(const json& j, const std::string& path)
{
    const json& k = require(j, "kind", path);
    if (!k.is_string())
        throw schema_error(path + "/kind", "expected a string");
    return k.get<std::string>();
}

const json& params_of(const json& j)
{
    static const json empty = json::object();
    const auto it = j.find("params");
    return it == j.end() ? empty : *it;
}

Domain parse_domain(const json& j, const std::string& path)
{
    const int dim = j.contains("dim") ? integer(j, "dim", path) : 1;
    if (dim < 1 || dim > 2)
        throw schema_error(path + "/dim", "dimension must be 1 or 2");
    Box box{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
    if (j.contains("bounds")) {
        const json& b = j.at("bounds");
        if (!b.is_array() || static_cast<int>(b.size()) != dim)
            throw schema_error(path + "/bounds", "expected " + std::to_string(dim) + " [lower, upper] pairs");
        for (int a = 0; a < dim; ++a) {
            const json& pair = b.at(static_cast<std::size_t>(a));
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
                throw schema_error(path + "/bounds/" + std::to_string(a), "expected [lower, upper]");
            box.lower[a] = pair[0].get<double>();
            box.upper[a] = pair[1].get<double>();
        }
    }
    try {
        return Domain(box);
    } catch (const Error& e) {
        throw schema_error(path, e.what());
    }
}

GainFunction parse_gain(const json& j, const std::string& path)
{
    const std::string kind = kind_of(j, path);
    try {
        if (kind == "logistic")
            return GainFunction::logistic(number(j, "beta1", path), number(j, "beta2", path));
        if (kind == "tanh")
            return GainFunction::tanh(number(j, "beta1", path), number(j, "beta2", path));
        if (kind == "constant")
            return GainFunction::constant(number(j, "value", path));
        if (kind == "affine")
            return GainFunction::affine(number(j, "a", path), number(j, "b", path), number(j, "upper", path));
        if (kind == "table") {
            const json& xs = require(j, "xs", path);
            const json& ys = require(j, "ys", path);
            return GainFunction::table(xs.get<std::vector<double>>(), ys.get<std::vector<double>>(),
                                       number(j, "sup", path), number(j, "lipschitz", path));
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::schema)
            throw;
        throw schema_error(path, e.what());
    } catch (const json::exception& e) {
        throw schema_error(path, e.what());
    }
    throw schema_error(path + "/kind", "unknown gain kind '" + kind + "'");
}

Kernel parse_kernel(const json& j, const std::string& path)
{
    const std::string kind = kind_of(j, path);
    const json& p = params_of(j);
    const std::string pp = path + "/params";
    try {
        if (kind == "zero")
            return Kernel::zero();
        if (kind == "constant")
            return Kernel::constant(number(p, "value", pp));
        if (kind == "gaussian")
            return Kernel::gaussian(number(p, "amplitude", pp), number(p, "sigma", pp));
        if (kind == "mexican_hat")
            return Kernel::mexican_hat(number(p, "a_exc", pp), number(p, "s_exc", pp), number(p, "a_inh", pp),
                                       number(p, "s_inh", pp));
        if (kind == "linear_sum")
            return Kernel::linear_sum(number(p, "c0", pp), number(p, "c1", pp));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::schema)
            throw;
        throw schema_error(path, e.what());
    }
    throw schema_error(path + "/kind", "unknown kernel kind '" + kind + "'");
}

PopulationPolicy parse_policy(const json& j, const std::string& path)
{
    const std::string kind = kind_of(j, path);
    PopulationPolicy p;
    if (kind == "uniform")
        p.kind = PopulationPolicy::Kind::uniform;
    else if (kind == "proportional")
        p.kind = PopulationPolicy::Kind::proportional;
    else
        throw schema_error(path + "/kind", "unknown population policy '" + kind + "'");
    p.value = number(j, "value", path);
    if (!(p.value > 0.0))
        throw schema_error(path + "/value", "must be positive");
    return p;
}

} // namespace

Profile parse_profile(const json& j, const std::string& path)
{
    const std::string kind = kind_of(j, path);
    const json& p = params_of(j);
    const std::string pp = path + "/params";
    try {
        if (kind == "zero")
            return Profile::zero();
        if (kind == "constant")
            return Profile::constant(number(p, "value", pp));
        if (kind == "linear")
            return Profile::linear(number(p, "offset", pp), number(p, "slope", pp));
        if (kind == "sine")
            return Profile::sine(number(p, "amplitude", pp), number(p, "mode", pp), number_or(p, "offset", 0.0, pp));
        if (kind == "cosine")
            return Profile::cosine(number(p, "amplitude", pp), number(p, "mode", pp),
                                   number_or(p, "offset", 0.0, pp));
        if (kind == "bump")
            return Profile::bump(number(p, "amplitude", pp), number(p, "center", pp), number(p, "width", pp),
                                 number_or(p, "offset", 0.0, pp));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::schema)
            throw;
        throw schema_error(path, e.what());
    }
    throw schema_error(path + "/kind", "unknown profile kind '" + kind + "'");
}

ModelConfig parse_model_config(const json& doc)
{
    if (!doc.is_object())
        throw schema_error("/", "top level must be an object");
    ModelConfig cfg;
    cfg.macro.domain = doc.contains("domain") ? parse_domain(doc.at("domain"), "/domain") : Domain(1);
    cfg.n = integer(doc, "n", "");
    if (cfg.n < 1)
        throw schema_error("/n", "must be >= 1");
    cfg.macro.tau = number(doc, "tau", "");
    if (!(cfg.macro.tau > 0.0))
        throw schema_error("/tau", "must be positive");
    cfg.macro.gain = parse_gain(require(doc, "gain", ""), "/gain");
    cfg.macro.kernel = parse_kernel(require(doc, "kernel", ""), "/kernel");

    const json& input = require(doc, "input", "");
    Modulation mod;
    if (input.contains("temporal")) {
        const json& t = input.at("temporal");
        const std::string kind = kind_of(t, "/input/temporal");
        if (kind == "sinusoid") {
            mod.kind = Modulation::Kind::sinusoid;
            mod.amplitude = number(t, "amplitude", "/input/temporal");
            mod.omega = number(t, "omega", "/input/temporal");
        } else if (kind != "none") {
            throw schema_error("/input/temporal/kind", "unknown modulation '" + kind + "'");
        }
    }
    cfg.macro.input = InputCurrent(parse_profile(input, "/input"), mod);
    cfg.policy = parse_policy(require(doc, "l_policy", ""), "/l_policy");
    if (doc.contains("initial"))
        cfg.initial = parse_profile(doc.at("initial"), "/initial");
    if (doc.contains("quadrature_order")) {
        cfg.quadrature_order = integer(doc, "quadrature_order", "");
        if (cfg.quadrature_order < 1)
            throw schema_error("/quadrature_order", "must be >= 1");
    }
    return cfg;
}

json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorKind::schema, origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                           ": invalid JSON: " + e.what());
    }
}

ModelConfig load_model_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::schema, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model_config(parse_json_text(ss.str(), path));
}

std::string fnv1a_hex(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nf
