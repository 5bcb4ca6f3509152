// Command-line front end: one subcommand per experiment plus `suite`, which
// runs them all. Results land in the output directory as JSON summaries and
// (for format csv/both) one CSV per density table. Exit codes: 0 all checks
// passed, 1 at least one check failed, 2 configuration or runtime error.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modvar/errors.hpp"
#include "modvar/runner.hpp"
#include "modvar/version.hpp"

namespace {

struct SharedFlags {
    std::string manifest;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false;
    bool out_set = false;
    bool format_set = false;
    bool threads_set = false;
};

void add_shared(CLI::App* sub, SharedFlags& f) {
    sub->add_option("--manifest", f.manifest,
                    "JSON manifest with config and tolerance overrides");
    sub->add_option("--out", f.out_dir, "output directory (default modvar_out)")
        ->each([&](const std::string&) { f.out_set = true; });
    sub->add_option("--seed", f.seed, "base RNG seed (default 20260825)")
        ->each([&](const std::string&) { f.seed_set = true; });
    sub->add_option("--threads", f.threads, "worker threads for Monte Carlo loops")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { f.threads_set = true; });
    sub->add_option("--format", f.format, "output format: json, csv, or both")
        ->check(CLI::IsMember({"json", "csv", "both"}))
        ->each([&](const std::string&) { f.format_set = true; });
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw modvar::ParseError("cannot read manifest file " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

modvar::RunOptions build_options(const std::string& experiment, const SharedFlags& f) {
    modvar::RunOptions opt;
    opt.experiment = experiment;
    if (!f.manifest.empty()) {
        opt = modvar::parse_manifest(read_file(f.manifest));
        if (opt.experiment != experiment)
            throw modvar::ValidationError(
                "manifest experiment '" + opt.experiment +
                "' does not match the subcommand '" + experiment + "'");
    }
    if (f.seed_set) opt.seed = f.seed;
    if (f.out_set) opt.out_dir = f.out_dir;
    if (f.format_set) opt.format = f.format;
    if (f.threads_set) opt.threads = f.threads;
    return opt;
}

int report(const modvar::ExperimentResult& result, const std::vector<std::string>& paths) {
    for (const auto& w : result.warnings)
        std::printf("warning: %s\n", w.c_str());
    int failed = 0;
    for (const auto& v : result.verdicts) {
        if (!v.pass) {
            ++failed;
            std::printf("FAIL %s: value %.6g vs tolerance %.6g\n", v.name.c_str(),
                        v.value, v.tolerance);
        }
    }
    std::printf("%s: %s (%zu checks, %d failed)\n", result.experiment.c_str(),
                failed == 0 ? "PASS" : "FAIL", result.verdicts.size(), failed);
    for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
    return failed == 0 ? 0 : 1;
}

int run_one(const std::string& experiment, const SharedFlags& f) {
    const modvar::RunOptions opt = build_options(experiment, f);
    const modvar::ExperimentResult result = modvar::dispatch(opt);
    const auto paths = modvar::write_outputs(result, opt);
    return report(result, paths);
}

int run_suite(const SharedFlags& f) {
    if (!f.manifest.empty())
        throw modvar::ValidationError(
            "suite does not take a manifest; configure experiments individually");
    static const char* kAll[] = {"gedanken", "mz",      "theorem1", "flatness",
                                 "grating",  "ellipse", "zn"};
    int worst = 0;
    for (const char* name : kAll) worst = std::max(worst, run_one(name, f));
    std::printf("suite: %s\n", worst == 0 ? "PASS" : "FAIL");
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modular-variable interference laboratory"};
    app.set_version_flag("--version", modvar::kVersion);
    app.require_subcommand(1);

    SharedFlags flags;
    static const char* kExperiments[] = {"gedanken", "mz",      "theorem1", "flatness",
                                         "grating",  "ellipse", "zn"};
    static const char* kAbout[] = {
        "which-path run: N weakly coupled particles, open or closed slit",
        "three-splitter interferometer with weak path counts",
        "two-lump moment deltas before and after overlap",
        "modular momentum flatness checks",
        "flux-phased grating: support and fringe shift",
        "parity and modular-momentum conservation (ellipse)",
        "Z(N) slit bases, abstract and on the grid",
    };
    for (size_t i = 0; i < std::size(kExperiments); ++i)
        add_shared(app.add_subcommand(kExperiments[i], kAbout[i]), flags);
    add_shared(app.add_subcommand("suite", "run every experiment with defaults"), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        if (sub->get_name() == "suite") return run_suite(flags);
        return run_one(sub->get_name(), flags);
    } catch (const modvar::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
}
