#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "fraclab_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

bool harness_available() { return std::getenv("FRACLAB_CLI") != nullptr; }

RunResult run_cli(const std::string& args) {
    const char* bin = std::getenv("FRACLAB_CLI");
    if (bin == nullptr) throw std::runtime_error("FRACLAB_CLI is not set");
    static int counter = 0;
    auto out_f = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
    auto err_f = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = '"' + std::string(bin) + "\" " + args + " >" + out_f.string() + " 2>" + err_f.string();
    int rc = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(out_f);
    res.err = slurp(err_f);
    return res;
}

fs::path config_dir() {
    const char* dir = std::getenv("FRACLAB_CONFIG_DIR");
    if (dir == nullptr) throw std::runtime_error("FRACLAB_CONFIG_DIR is not set");
    return fs::path(dir);
}

fs::path write_cantor_ifs() {
    auto p = scratch_dir() / "cantor.json";
    std::ofstream(p) << R"({
      "dim": 1,
      "maps": [
        {"ratio": 0.3333333333333333, "orthogonal": [[1.0]], "translation": [0.0]},
        {"ratio": 0.3333333333333333, "orthogonal": [[1.0]], "translation": [0.6666666666666666]}
      ],
      "condensation": {"kind": "interval", "a": 0.4, "b": 0.6},
      "open_set": {"vertices": [[0.0], [1.0]]}
    })";
    return p;
}

}  // namespace

TEST_CASE("generate writes byte-identical clouds across runs") {
    if (!harness_available()) return;  // run through ctest
    auto ifs = write_cantor_ifs();
    auto a = scratch_dir() / "cloud_a.json";
    auto b = scratch_dir() / "cloud_b.json";
    auto r1 = run_cli("generate --ifs " + ifs.string() + " --delta 0.0013717421124828531 --out " + a.string());
    auto r2 = run_cli("generate --ifs " + ifs.string() + " --delta 0.0013717421124828531 --out " + b.string());
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    auto da = slurp(a);
    CHECK(!da.empty());
    CHECK(da == slurp(b));

    auto r3 = run_cli("generate --ifs " + ifs.string() +
                      " --delta 0.0013717421124828531 --attractor-only --out -");
    CHECK(r3.exit_code == 0);
    CHECK(r3.out.find("\"points\"") != std::string::npos);
}

TEST_CASE("estimate runs on a generated cloud and respects --jobs determinism") {
    if (!harness_available()) return;  // run through ctest
    auto ifs = write_cantor_ifs();
    auto cloud = scratch_dir() / "est_cloud.json";
    REQUIRE(run_cli("generate --ifs " + ifs.string() + " --delta 0.00015241579027587258 --out " +
                    cloud.string()).exit_code == 0);

    auto one = scratch_dir() / "est1.json";
    auto many = scratch_dir() / "est7.json";
    auto r1 = run_cli("estimate --mode assouad --space " + cloud.string() +
                      " --pair 0.0008,0.19 --jobs 1 --out " + one.string());
    auto r7 = run_cli("estimate --mode assouad --space " + cloud.string() +
                      " --pair 0.0008,0.19 --jobs 7 --out " + many.string());
    CHECK(r1.exit_code == 0);
    CHECK(r7.exit_code == 0);
    CHECK(slurp(one) == slurp(many));
    CHECK(slurp(one).find("\"exponent\"") != std::string::npos);

    auto csv = scratch_dir() / "rows.csv";
    auto rc = run_cli("estimate --mode lower --space " + cloud.string() +
                      " --pair 0.0008,0.19 --csv " + csv.string() + " --out -");
    CHECK(rc.exit_code == 0);
    CHECK(slurp(csv).rfind("x_index,", 0) == 0);
}

TEST_CASE("cli failures emit structured errors on stderr") {
    if (!harness_available()) return;  // run through ctest
    SUBCASE("missing required options") {
        auto r = run_cli("estimate");
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("\"error\"") != std::string::npos);
        CHECK(r.err.find("argument_error") != std::string::npos);
    }
    SUBCASE("unknown subcommand") {
        auto r = run_cli("frobnicate");
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("argument_error") != std::string::npos);
    }
    SUBCASE("malformed json input") {
        auto bad = scratch_dir() / "bad.json";
        std::ofstream(bad) << "{not json";
        auto r = run_cli("generate --ifs " + bad.string() + " --delta 0.01 --out -");
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("argument_error") != std::string::npos);
        CHECK(r.out.empty());
    }
    SUBCASE("inadmissible windows surface as resolution errors") {
        auto ifs = write_cantor_ifs();
        auto cloud = scratch_dir() / "res_cloud.json";
        REQUIRE(run_cli("generate --ifs " + ifs.string() + " --delta 0.0013717421124828531 --out " +
                        cloud.string()).exit_code == 0);
        auto r = run_cli("estimate --mode assouad --space " + cloud.string() + " --pair 1e-9,2e-8 --out -");
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("resolution_error") != std::string::npos);
    }
}

TEST_CASE("cosc subcommand reports the margins") {
    if (!harness_available()) return;  // run through ctest
    auto ifs = write_cantor_ifs();
    auto r = run_cli("cosc --ifs " + ifs.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"cosc_ok\": true") != std::string::npos);
    CHECK(r.out.find("\"cosc_margin\"") != std::string::npos);
}

TEST_CASE("reproduce runs a bundled config and checks expectations") {
    if (!harness_available() || std::getenv("FRACLAB_CONFIG_DIR") == nullptr) return;  // run through ctest
    auto out = scratch_dir() / "rep_vk";
    auto cfg = config_dir() / "vk_q04.json";
    auto r = run_cli("reproduce vk --config " + cfg.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "vk_q04.report.json"));
    CHECK(fs::exists(out / "summary.md"));
    CHECK(slurp(out / "summary.md").find("| vk_q04 | vk |") != std::string::npos);

    SUBCASE("expectation mismatches exit with code two") {
        auto twisted = scratch_dir() / "twisted.json";
        auto body = slurp(cfg);
        auto pos = body.find("\"pass\"");
        REQUIRE(pos != std::string::npos);
        body.replace(pos, 6, "\"fail\"");
        std::ofstream(twisted) << body;
        auto r2 = run_cli("reproduce vk --config " + twisted.string() + " --out " +
                          (scratch_dir() / "rep_twisted").string());
        CHECK(r2.exit_code == 2);
    }
}