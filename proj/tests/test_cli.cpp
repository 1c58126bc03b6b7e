#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string output;
};

Result nfield(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + NFIELD_PATH + std::string(" ") + args + " 2>&1";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.output.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("nfield_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string data(const std::string& file)
{
    return std::string(NF_TEST_DATA) + "/" + file;
}

} // namespace

TEST_CASE("simulate on a silent model produces no events")
{
    const fs::path out = scratch("silent");
    const Result r = nfield("simulate --config " + data("silent.json") + " --T 2 --replicates 3 --out " + out.string());
    CHECK(r.code == 0);
    CHECK(slurp(out / "paths.csv") == "replicate,time,population,direction\n");
    const nlohmann::json m = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(m.at("seed") == 0);
    CHECK(m.at("config_hash").get<std::string>().size() == 16);
    CHECK(m.contains("wall_time_seconds"));
    CHECK(m.contains("version"));
}

TEST_CASE("lln report has one row per ladder level and a slope")
{
    const fs::path out = scratch("lln");
    const Result r = nfield("lln --config " + data("logistic.json") +
                            " --ladder 4,8,16,32 --T 0.5 --replicates 8 --ref-cells 128 --ref-dt 1e-2 --out " +
                            out.string());
    REQUIRE(r.code == 0);
    const nlohmann::json rep = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(rep.at("rows").size() == 4);
    CHECK(std::isfinite(rep.at("fit").at("slope").get<double>()));
    CHECK(slurp(out / "report.csv").rfind("n,delta_plus", 0) == 0);
}

TEST_CASE("schema and usage errors exit with code 2")
{
    const Result r = nfield("solve --config " + data("missing_tau.json") + " --out " + (scratch("bad") / "x.csv").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("'tau'") != std::string::npos);

    const fs::path broken = scratch("broken") / "broken.json";
    std::ofstream(broken) << "{\n  \"n\": 4,\n  \"tau\": ,\n}\n";
    const Result s = nfield("solve --config " + broken.string());
    CHECK(s.code == 2);
    CHECK(s.output.find("broken.json:3:") != std::string::npos);

    CHECK(nfield("lln --config " + data("logistic.json") + " --ladder 8,4").code == 2);
    CHECK(nfield("moments --config " + data("logistic.json")).code == 2);
    CHECK(nfield("").code == 2);
}

TEST_CASE("capacity errors exit with code 4")
{
    const Result r = nfield("oracle-check --config " + data("affine.json") + " --out " + scratch("cap").string());
    CHECK(r.code == 4);
}

TEST_CASE("solve writes a time, x, value table")
{
    const fs::path out = scratch("solve") / "ref.csv";
    REQUIRE(nfield("solve --config " + data("logistic.json") + " --T 1 --record-every 500 --out " + out.string()).code == 0);
    const std::string csv = slurp(out);
    CHECK(csv.rfind("time,x,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 8);
    CHECK(fs::exists(out.string() + ".manifest.json"));
}

TEST_CASE("reports are byte-identical across worker counts")
{
    const std::string lln = "lln --config " + data("logistic.json") +
                            " --ladder 2,4,8 --T 0.5 --replicates 12 --seed 5 --ref-cells 64 --ref-dt 1e-2 --out ";
    const fs::path a = scratch("threads1"), b = scratch("threads4");
    REQUIRE(nfield(lln + a.string(), "NF_THREADS=1").code == 0);
    REQUIRE(nfield(lln + b.string(), "NF_THREADS=4").code == 0);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));

    const std::string sim = "simulate --config " + data("logistic.json") + " --T 0.5 --replicates 6 --seed 3 --out ";
    REQUIRE(nfield(sim + a.string(), "NF_THREADS=1").code == 0);
    REQUIRE(nfield(sim + b.string(), "NF_THREADS=3").code == 0);
    CHECK(slurp(a / "paths.csv") == slurp(b / "paths.csv"));
}
