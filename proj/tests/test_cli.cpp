#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path work_dir()
{
    const fs::path d = fs::path(BCL_TEST_OUT);
    fs::create_directories(d);
    return d;
}

fs::path write_file(const std::string& name, const std::string& text)
{
    const fs::path p = work_dir() / name;
    std::ofstream(p) << text;
    return p;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("'") + BCL_CLI + "' " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kPq = R"({
  "task": "carleson-pq",
  "n": 1, "p": 2, "q": 2, "r": 0.5,
  "weight": {"type": "standard", "alpha": 0},
  "measure": {"type": "weighted", "boundary_power": 1},
  "quadrature": {"seed": 3, "mc_samples": 256, "chunk": 128},
  "grid": {"dyadic_depth": 10, "directions": 3}
  EXTRA
})";

std::string pq(const std::string& extra)
{
    std::string s = kPq;
    s.replace(s.find("EXTRA"), 5, extra);
    return s;
}

}  // namespace

TEST_CASE("malformed input exits 2 and writes nothing")
{
    const fs::path out = work_dir() / "never.json";
    fs::remove(out);
    const auto bad = write_file("malformed.json", "{\"task\": \"carleson-pq\", ");
    CHECK(run_cli("run '" + bad.string() + "' --output '" + out.string() + "'") == 2);
    CHECK(run_cli("run '" + (work_dir() / "missing.json").string() + "' --output '" + out.string() + "'") == 2);

    const auto unknown = write_file("unknown-key.json", pq(", \"colour\": 1"));
    CHECK(run_cli("run '" + unknown.string() + "' --output '" + out.string() + "'") == 2);

    const auto bad_format = write_file("bad-format.json", pq(", \"output\": {\"format\": \"xml\"}"));
    CHECK(run_cli("run '" + bad_format.string() + "' --output '" + out.string() + "'") == 2);
    CHECK_FALSE(fs::exists(out));

    CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("csv is refused for tasks without a profile")
{
    const auto audit = write_file("audit-csv.json", R"({
  "task": "audit-4.2", "n": 1, "p": 2, "q": 2, "r": 0.5,
  "weight": {"type": "standard", "alpha": 0},
  "measure": {"type": "weighted"},
  "phi": {"type": "identity"},
  "psi": {"type": "dilation", "lambda": 0.5},
  "output": {"format": "csv"}
})");
    CHECK(run_cli("run '" + audit.string() + "'") == 2);
}

TEST_CASE("json report carries the seed override")
{
    const auto cfg = write_file("pq.json", pq(""));
    const fs::path out = work_dir() / "pq-report.json";
    REQUIRE(run_cli("run '" + cfg.string() + "' --seed 99 --output '" + out.string() + "'") == 0);
    const auto report = nlohmann::json::parse(slurp(out));
    CHECK(report["schema"] == "bcl-report/1");
    CHECK(report["task"] == "carleson-pq");
    CHECK(report["seed"] == 99);
    CHECK(report["config"]["quadrature"]["seed"] == 99);
    CHECK(report["result"]["bounded"] == "yes");
    CHECK(report["result"]["vanishing"] == "yes");
}

TEST_CASE("csv profile has one row per grid point")
{
    const auto cfg = write_file("pq-csv.json", pq(", \"output\": {\"format\": \"csv\"}"));
    const fs::path out = work_dir() / "pq.csv";
    REQUIRE(run_cli("run '" + cfg.string() + "' --output '" + out.string() + "'") == 0);
    std::istringstream in(slurp(out));
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,radius,re_1,im_1,value,se,flagged");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == 10 * 3 + 1);  // depth x directions, plus the origin
}
