// Drives the installed command-line binary end to end. The binary path comes
// in through MODVAR_CLI_PATH so the same test source works from any build
// tree. Each case gets a throwaway directory under the system temp root.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string cli_path() {
    const char* p = std::getenv("MODVAR_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "MODVAR_CLI_PATH must point at the built binary");
    return p;
}

struct RunOutput {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// Runs `modvar <args>` with stdout/stderr captured to files in `dir`.
RunOutput run_cli(const fs::path& dir, const std::string& args) {
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = cli_path() + " " + args + " > " + out_file.string() +
                            " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunOutput r;
#ifdef _WIN32
    r.exit_code = status;
#else
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

// Fresh scratch directory per test case, removed on destruction.
struct TempDir {
    fs::path path;
    TempDir() {
        const auto tick =
            std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() /
               ("modvar_cli_" + std::to_string(tick) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_manifest(const fs::path& p, const Json& j) {
    std::ofstream f(p, std::ios::binary);
    f << j.dump(2);
}

}  // namespace

TEST_CASE("zn run exits zero and is byte-for-byte reproducible") {
    TempDir tmp;
    const fs::path out_a = tmp.path / "a";
    const fs::path out_b = tmp.path / "b";

    const RunOutput a = run_cli(tmp.path, "zn --out " + out_a.string());
    REQUIRE_MESSAGE(a.exit_code == 0, a.out, a.err);
    CHECK(a.out.find("zn: PASS") != std::string::npos);

    const Json summary = Json::parse(slurp(out_a / "zn_summary.json"));
    CHECK(summary.at("experiment") == "zn");
    CHECK(summary.at("all_pass") == true);
    CHECK(summary.at("seed") == 20260825u);  // default seed echoed back
    CHECK(summary.at("config").at("orders") == Json({2, 3, 5, 8}));
    CHECK(summary.at("verdicts").size() >= 6);

    const RunOutput b = run_cli(tmp.path, "zn --out " + out_b.string());
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(out_a / "zn_summary.json") == slurp(out_b / "zn_summary.json"));
}

TEST_CASE("seed flag overrides the default and lands in the summary") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";
    const RunOutput r = run_cli(tmp.path, "ellipse --seed 7 --out " + out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.out, r.err);
    const Json summary = Json::parse(slurp(out / "ellipse_summary.json"));
    CHECK(summary.at("seed") == 7u);
    CHECK(summary.at("all_pass") == true);
}

TEST_CASE("unknown manifest keys are rejected with exit code 2") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";

    // Misspelled config key.
    const fs::path m1 = tmp.path / "m1.json";
    write_manifest(m1, {{"experiment", "gedanken"}, {"config", {{"lamda", 0.1}}}});
    const RunOutput r1 =
        run_cli(tmp.path, "gedanken --manifest " + m1.string() + " --out " + out.string());
    CHECK(r1.exit_code == 2);
    CHECK(r1.err.find("lamda") != std::string::npos);

    // Misspelled top-level key.
    const fs::path m2 = tmp.path / "m2.json";
    write_manifest(m2, {{"experiment", "zn"}, {"sed", 1}});
    const RunOutput r2 =
        run_cli(tmp.path, "zn --manifest " + m2.string() + " --out " + out.string());
    CHECK(r2.exit_code == 2);
    CHECK(r2.err.find("'sed'") != std::string::npos);

    // Neither run may leave output behind.
    CHECK(!fs::exists(out / "gedanken_summary.json"));
    CHECK(!fs::exists(out / "zn_summary.json"));
}

TEST_CASE("manifest experiment must match the subcommand") {
    TempDir tmp;
    const fs::path m = tmp.path / "m.json";
    write_manifest(m, {{"experiment", "zn"}});
    const RunOutput r = run_cli(tmp.path, "gedanken --manifest " + m.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("does not match") != std::string::npos);
}

TEST_CASE("impossible tolerance overrides turn the exit code to 1") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";
    const fs::path m = tmp.path / "m.json";
    write_manifest(m, {{"experiment", "zn"},
                       {"tolerances", {{"zn_orthonormal_dev", 1e-30}}}});
    const RunOutput r =
        run_cli(tmp.path, "zn --manifest " + m.string() + " --out " + out.string());
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("FAIL zn_orthonormal_dev") != std::string::npos);

    // The summary is still written, with the failure recorded.
    const Json summary = Json::parse(slurp(out / "zn_summary.json"));
    CHECK(summary.at("all_pass") == false);
}

TEST_CASE("evolution guard aborts the run with exit 2 and no partial output") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";
    const fs::path m = tmp.path / "m.json";
    write_manifest(m, {{"experiment", "theorem1"},
                       {"config", {{"dt", 1.0},
                                   {"n_points", 256},
                                   {"grid_length", 16.0},
                                   {"alphas", {0.0, 3.141592653589793}},
                                   {"checkpoints", 1},
                                   {"t_max", 1.0}}}});
    const RunOutput r =
        run_cli(tmp.path, "theorem1 --manifest " + m.string() + " --out " + out.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("dt") != std::string::npos);
    CHECK(!fs::exists(out / "theorem1_summary.json"));
}

TEST_CASE("csv format writes the pointer density with a normalized mass") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";
    const RunOutput r =
        run_cli(tmp.path, "gedanken --format csv --out " + out.string());
    REQUIRE_MESSAGE(r.exit_code == 0, r.out, r.err);

    const fs::path csv = out / "gedanken_meter_p_density.csv";
    REQUIRE(fs::exists(csv));
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    CHECK(header == "p_q,density");

    std::vector<double> axis, density;
    std::string line;
    while (std::getline(f, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        axis.push_back(std::stod(line.substr(0, comma)));
        density.push_back(std::stod(line.substr(comma + 1)));
    }
    REQUIRE(axis.size() == 512);  // default meter_points
    const double dp = axis[1] - axis[0];
    double mass = 0.0;
    for (double d : density) mass += d;
    CHECK(mass * dp == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("version flag reports the library version") {
    TempDir tmp;
    const RunOutput r = run_cli(tmp.path, "--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("1.0.0") != std::string::npos);
}
