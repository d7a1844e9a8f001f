// CLI smoke tests: run the built binary against the bundled configs at
// reduced grid sizes and check exit codes plus report artifacts.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("TUBEPW_BIN");
    REQUIRE(b != nullptr);
    return b;
}

std::string configs() {
    const char* c = std::getenv("TUBEPW_CONFIGS");
    REQUIRE(c != nullptr);
    return c;
}

int run(const std::string& cmd) {
    int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// drop the timestamp line, the one field allowed to differ between reruns
std::string strip_timestamp(std::string s) {
    auto pos = s.find("\"timestamp\"");
    if (pos == std::string::npos) return s;
    auto end = s.find('\n', pos);
    s.erase(pos, end - pos + 1);
    return s;
}

}  // namespace

TEST_CASE("bundled configs smoke-run at reduced grids") {
    fs::path tmp = fs::temp_directory_path() / "tubepw_cli_smoke";
    fs::remove_all(tmp);
    for (const char* name :
         {"cor2_isometry_n1.json", "roundtrip_halfline.json", "thm1_inequalities.json",
          "cor1_growth.json", "edge_of_wedge.json", "thm3_mollified.json"}) {
        std::string out = (tmp / name).string();
        int rc = run(bin() + " --grid-scale 0.5 --out " + out + " verify " + configs() + "/" +
                     name);
        INFO(name);
        CHECK(rc == 0);
        CHECK(fs::exists(fs::path(out) / "results.json"));
        CHECK(fs::exists(fs::path(out) / "summary.csv"));
    }
}

TEST_CASE("designed negative suite exits with code 2") {
    fs::path tmp = fs::temp_directory_path() / "tubepw_cli_neg";
    int rc = run(bin() + " --grid-scale 0.5 --out " + tmp.string() + " verify " + configs() +
                 "/negative_controls.json");
    CHECK(rc == 2);
}

TEST_CASE("unresolved reference exits with code 1") {
    fs::path tmp = fs::temp_directory_path() / "tubepw_cli_badcfg.json";
    std::ofstream(tmp) << R"({"suite": [{"check": "cor2_isometry", "density": "ghost",
                              "alpha": -0.5, "cone": "ghost", "base": "ghost"}]})";
    int rc = run(bin() + " verify " + tmp.string());
    CHECK(rc == 1);
}

TEST_CASE("rerunning a suite is byte-identical modulo the timestamp") {
    fs::path a = fs::temp_directory_path() / "tubepw_det_a";
    fs::path b = fs::temp_directory_path() / "tubepw_det_b";
    std::string cfg = configs() + std::string("/cor1_growth.json");
    REQUIRE(run(bin() + " --grid-scale 0.5 --out " + a.string() + " verify " + cfg) == 0);
    REQUIRE(run(bin() + " --grid-scale 0.5 --out " + b.string() + " verify " + cfg) == 0);
    CHECK(strip_timestamp(slurp(a / "results.json")) ==
          strip_timestamp(slurp(b / "results.json")));
}

TEST_CASE("parallel verify matches sequential results byte for byte") {
    fs::path a = fs::temp_directory_path() / "tubepw_jobs_a";
    fs::path b = fs::temp_directory_path() / "tubepw_jobs_b";
    std::string cfg = configs() + std::string("/thm1_inequalities.json");
    REQUIRE(run(bin() + " --grid-scale 0.5 --out " + a.string() + " verify " + cfg) == 0);
    REQUIRE(run(bin() + " --grid-scale 0.5 --jobs 4 --out " + b.string() + " verify " + cfg) == 0);
    CHECK(strip_timestamp(slurp(a / "results.json")) ==
          strip_timestamp(slurp(b / "results.json")));
}

TEST_CASE("describe and cone subcommands answer from a config") {
    std::string cfg = configs() + std::string("/cor2_isometry_n1.json");
    CHECK(run(bin() + " --config " + cfg + " describe halfline") == 0);
    CHECK(run(bin() + " --config " + cfg + " cone dual --id halfline") == 0);
    CHECK(run(bin() + " --config " + cfg + " cone regular --id halfline") == 0);
    CHECK(run(bin() + " --config " + cfg + " describe nonexistent") == 1);
}

TEST_CASE("recover subcommand writes a density CSV") {
    fs::path tmp = fs::temp_directory_path() / "tubepw_rec.csv";
    std::string cfg = configs() + std::string("/roundtrip_halfline.json");
    int rc = run(bin() + " --config " + cfg + " recover --tube-function F_texp --y 0.5 --quad desk --csv " +
                 tmp.string());
    CHECK(rc == 0);
    std::string head = slurp(tmp).substr(0, 16);
    CHECK(head.rfind("t,re,im,trusted", 0) == 0);
}
