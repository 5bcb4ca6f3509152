#include "modvar/runner.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "modvar/errors.hpp"

namespace modvar {

namespace {

// Reads typed values out of a JSON object, collecting every problem (wrong
// type, out of range, unknown key) so the caller sees one ValidationError
// naming all of them.
class ConfigReader {
public:
    ConfigReader(const Json& j, std::string context)
        : j_(j), ctx_(std::move(context)) {
        if (!j_.is_object()) issues_.push_back(ctx_ + " must be a JSON object");
    }

    double number(const std::string& key, double def, double lo, double hi) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_number()) {
            issues_.push_back(ctx_ + "." + key + " must be a number");
            return def;
        }
        const double x = v.get<double>();
        if (!(x >= lo && x <= hi)) {
            std::ostringstream os;
            os << ctx_ << "." << key << " = " << x << " outside [" << lo << ", "
               << hi << "]";
            issues_.push_back(os.str());
            return def;
        }
        return x;
    }

    long integer(const std::string& key, long def, long lo, long hi) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_number_integer()) {
            issues_.push_back(ctx_ + "." + key + " must be an integer");
            return def;
        }
        const long x = v.get<long>();
        if (x < lo || x > hi) {
            std::ostringstream os;
            os << ctx_ << "." << key << " = " << x << " outside [" << lo << ", "
               << hi << "]";
            issues_.push_back(os.str());
            return def;
        }
        return x;
    }

    bool boolean(const std::string& key, bool def) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_boolean()) {
            issues_.push_back(ctx_ + "." + key + " must be a boolean");
            return def;
        }
        return v.get<bool>();
    }

    std::string text(const std::string& key, std::string def,
                     const std::set<std::string>& allowed = {}) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_string()) {
            issues_.push_back(ctx_ + "." + key + " must be a string");
            return def;
        }
        std::string s = v.get<std::string>();
        if (!allowed.empty() && allowed.count(s) == 0) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            issues_.push_back(ctx_ + "." + key + " = '" + s + "' not one of {" +
                              opts + "}");
            return def;
        }
        return s;
    }

    std::vector<double> number_list(const std::string& key,
                                    std::vector<double> def) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_array()) {
            issues_.push_back(ctx_ + "." + key + " must be an array of numbers");
            return def;
        }
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) {
                issues_.push_back(ctx_ + "." + key + " must contain only numbers");
                return def;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<int> int_list(const std::string& key, std::vector<int> def) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_array()) {
            issues_.push_back(ctx_ + "." + key + " must be an array of integers");
            return def;
        }
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer()) {
                issues_.push_back(ctx_ + "." + key + " must contain only integers");
                return def;
            }
            out.push_back(e.get<int>());
        }
        return out;
    }

    Tolerances tolerances() {
        seen_.insert("tolerances");
        Tolerances out;
        if (!j_.is_object() || !j_.contains("tolerances")) return out;
        const Json& v = j_.at("tolerances");
        if (!v.is_object()) {
            issues_.push_back(ctx_ + ".tolerances must be an object of numbers");
            return out;
        }
        for (const auto& [k, e] : v.items()) {
            if (!e.is_number()) {
                issues_.push_back(ctx_ + ".tolerances." + k + " must be a number");
                continue;
            }
            out[k] = e.get<double>();
        }
        return out;
    }

    void finish() {
        if (j_.is_object())
            for (const auto& [k, v] : j_.items())
                if (seen_.count(k) == 0)
                    issues_.push_back("unknown key '" + k + "' in " + ctx_);
        if (issues_.empty()) return;
        std::string msg = "config validation failed:";
        for (const auto& s : issues_) msg += " [" + s + "]";
        throw ValidationError(msg);
    }

private:
    const Json& j_;
    std::string ctx_;
    std::set<std::string> seen_;
    std::vector<std::string> issues_;
};

Json tolerances_json(const Tolerances& t) {
    Json j = Json::object();
    for (const auto& [k, v] : t) j[k] = v;
    return j;
}

}  // namespace

RunOptions parse_manifest(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("manifest top level must be a JSON object");

    std::vector<std::string> issues;
    static const std::set<std::string> known = {
        "experiment", "seed", "out", "format", "threads", "config", "tolerances"};
    for (const auto& [k, v] : doc.items())
        if (known.count(k) == 0) issues.push_back("unknown key '" + k + "' in manifest");

    RunOptions opt;
    if (!doc.contains("experiment") || !doc.at("experiment").is_string())
        issues.push_back("manifest.experiment (string) is required");
    else
        opt.experiment = doc.at("experiment").get<std::string>();

    if (doc.contains("seed")) {
        const Json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer())
            issues.push_back("manifest.seed must be a non-negative integer");
        else if (s.is_number_integer() && s.get<long long>() < 0)
            issues.push_back("manifest.seed must be a non-negative integer");
        else
            opt.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("out")) {
        if (!doc.at("out").is_string())
            issues.push_back("manifest.out must be a string");
        else
            opt.out_dir = doc.at("out").get<std::string>();
    }
    if (doc.contains("format")) {
        if (!doc.at("format").is_string())
            issues.push_back("manifest.format must be a string");
        else
            opt.format = doc.at("format").get<std::string>();
    }
    if (opt.format != "json" && opt.format != "csv" && opt.format != "both")
        issues.push_back("manifest.format must be json, csv, or both");
    if (doc.contains("threads")) {
        if (!doc.at("threads").is_number_integer() || doc.at("threads").get<long>() < 1)
            issues.push_back("manifest.threads must be an integer >= 1");
        else
            opt.threads = static_cast<int>(doc.at("threads").get<long>());
    }
    if (doc.contains("config")) {
        if (!doc.at("config").is_object())
            issues.push_back("manifest.config must be an object");
        else
            opt.config = doc.at("config");
    }
    // Tolerance overrides ride inside the config block from here on.
    if (doc.contains("tolerances")) {
        if (!doc.at("tolerances").is_object())
            issues.push_back("manifest.tolerances must be an object");
        else
            opt.config["tolerances"] = doc.at("tolerances");
    }
    if (!issues.empty()) {
        std::string msg = "manifest validation failed:";
        for (const auto& s : issues) msg += " [" + s + "]";
        throw ValidationError(msg);
    }
    return opt;
}

GedankenConfig gedanken_config(const Json& config) {
    ConfigReader rd(config, "gedanken");
    GedankenConfig c;
    c.n_particles = static_cast<int>(rd.integer("n_particles", c.n_particles, 1, 100000));
    c.lambda = rd.number("lambda", c.lambda, 1e-9, 10.0);
    c.slit_open = rd.boolean("slit_open", c.slit_open);
    c.boundary = rd.text("boundary", c.boundary, {"absorber", "reflector"});
    c.monte_carlo = rd.boolean("monte_carlo", c.monte_carlo);
    c.n_runs = rd.integer("n_runs", c.n_runs, 100, 100000000);
    c.meter_points = static_cast<int>(rd.integer("meter_points", c.meter_points, 8, 65536));
    c.meter_length = rd.number("meter_length", c.meter_length, 1e-6, 1e6);
    c.sigma_q = rd.number("sigma_q", c.sigma_q, 1e-6, 1e3);
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

MachZehnderConfig mach_zehnder_config(const Json& config) {
    ConfigReader rd(config, "mz");
    MachZehnderConfig c;
    c.l4_blocked = rd.boolean("l4_blocked", c.l4_blocked);
    c.plate_tilt = rd.number("plate_tilt", c.plate_tilt, -10.0, 10.0);
    c.monte_carlo = rd.boolean("monte_carlo", c.monte_carlo);
    c.n_photons = rd.integer("n_photons", c.n_photons, 100, 100000000);
    c.meter_points = static_cast<int>(rd.integer("meter_points", c.meter_points, 8, 65536));
    c.meter_length = rd.number("meter_length", c.meter_length, 1e-6, 1e6);
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

Theorem1Config theorem1_config(const Json& config) {
    ConfigReader rd(config, "theorem1");
    Theorem1Config c;
    c.lump_kind = rd.text("lump_kind", c.lump_kind, {"gaussian", "compact"});
    c.lump_sigma = rd.number("lump_sigma", c.lump_sigma, 1e-6, 1e3);
    c.separation = rd.number("separation", c.separation, 1e-6, 1e6);
    c.alphas = rd.number_list("alphas", c.alphas);
    c.t_max = rd.number("t_max", c.t_max, 1e-9, 1e6);
    c.checkpoints = static_cast<int>(rd.integer("checkpoints", c.checkpoints, 1, 10000));
    c.n_points = static_cast<int>(rd.integer("n_points", c.n_points, 8, 1 << 22));
    c.grid_length = rd.number("grid_length", c.grid_length, 1e-6, 1e9);
    c.mass = rd.number("mass", c.mass, 1e-9, 1e9);
    c.dt = rd.number("dt", c.dt, 1e-12, 1e3);
    c.barrier_height = rd.number("barrier_height", c.barrier_height, 1e-9, 1e9);
    c.barrier_halfwidth = rd.number("barrier_halfwidth", c.barrier_halfwidth, 1e-9, 1e9);
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

FlatnessConfig flatness_config(const Json& config) {
    ConfigReader rd(config, "flatness");
    FlatnessConfig c;
    c.separation = rd.number("separation", c.separation, 1e-6, 1e6);
    c.n_max = static_cast<int>(rd.integer("n_max", c.n_max, 1, 64));
    c.lump_sigma = rd.number("lump_sigma", c.lump_sigma, 1e-6, 1e6);
    c.lump_center = rd.number("lump_center", c.lump_center, -1e9, 1e9);
    c.n_points = static_cast<int>(rd.integer("n_points", c.n_points, 8, 1 << 22));
    c.grid_length = rd.number("grid_length", c.grid_length, 1e-6, 1e9);
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

GratingConfig grating_config(const Json& config) {
    ConfigReader rd(config, "grating");
    GratingConfig c;
    c.n_slits = static_cast<int>(rd.integer("n_slits", c.n_slits, 2, 4096));
    c.separation = rd.number("separation", c.separation, 1e-6, 1e6);
    c.flux_ratio = rd.number("flux_ratio", c.flux_ratio, -100.0, 100.0);
    c.incident_p = rd.number("incident_p", c.incident_p, -1e6, 1e6);
    c.points_per_slit =
        static_cast<int>(rd.integer("points_per_slit", c.points_per_slit, 8, 65536));
    c.slit_width_frac = rd.number("slit_width_frac", c.slit_width_frac, 1e-6, 0.499);
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

ConservationConfig conservation_config(const Json& config) {
    ConfigReader rd(config, "ellipse");
    ConservationConfig c;
    c.n_samples = rd.integer("n_samples", c.n_samples, 1, 100000000);
    c.p_total = rd.number("p_total", c.p_total, 1e-9, 1e9);
    c.sweep_steps = static_cast<int>(rd.integer("sweep_steps", c.sweep_steps, 2, 1000000));
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

ZnConfig zn_config(const Json& config) {
    ConfigReader rd(config, "zn");
    ZnConfig c;
    c.orders = rd.int_list("orders", c.orders);
    c.tolerances = rd.tolerances();
    rd.finish();
    return c;
}

namespace {

Json effective_config(const std::string& experiment, const Json& config,
                      int threads) {
    Json j = Json::object();
    if (experiment == "gedanken") {
        GedankenConfig c = gedanken_config(config);
        j["n_particles"] = c.n_particles;
        j["lambda"] = c.lambda;
        j["slit_open"] = c.slit_open;
        j["boundary"] = c.boundary;
        j["monte_carlo"] = c.monte_carlo;
        j["n_runs"] = c.n_runs;
        j["meter_points"] = c.meter_points;
        j["meter_length"] = c.meter_length;
        j["sigma_q"] = c.sigma_q;
        j["threads"] = threads;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else if (experiment == "mz") {
        MachZehnderConfig c = mach_zehnder_config(config);
        j["l4_blocked"] = c.l4_blocked;
        j["plate_tilt"] = c.plate_tilt;
        j["monte_carlo"] = c.monte_carlo;
        j["n_photons"] = c.n_photons;
        j["meter_points"] = c.meter_points;
        j["meter_length"] = c.meter_length;
        j["threads"] = threads;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else if (experiment == "theorem1") {
        Theorem1Config c = theorem1_config(config);
        j["lump_kind"] = c.lump_kind;
        j["lump_sigma"] = c.lump_sigma;
        j["separation"] = c.separation;
        j["alphas"] = c.alphas;
        j["t_max"] = c.t_max;
        j["checkpoints"] = c.checkpoints;
        j["n_points"] = c.n_points;
        j["grid_length"] = c.grid_length;
        j["mass"] = c.mass;
        j["dt"] = c.dt;
        j["barrier_height"] = c.barrier_height;
        j["barrier_halfwidth"] = c.barrier_halfwidth;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else if (experiment == "flatness") {
        FlatnessConfig c = flatness_config(config);
        j["separation"] = c.separation;
        j["n_max"] = c.n_max;
        j["lump_sigma"] = c.lump_sigma;
        j["lump_center"] = c.lump_center;
        j["n_points"] = c.n_points;
        j["grid_length"] = c.grid_length;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else if (experiment == "grating") {
        GratingConfig c = grating_config(config);
        j["n_slits"] = c.n_slits;
        j["separation"] = c.separation;
        j["flux_ratio"] = c.flux_ratio;
        j["incident_p"] = c.incident_p;
        j["points_per_slit"] = c.points_per_slit;
        j["slit_width_frac"] = c.slit_width_frac;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else if (experiment == "ellipse") {
        ConservationConfig c = conservation_config(config);
        j["n_samples"] = c.n_samples;
        j["p_total"] = c.p_total;
        j["sweep_steps"] = c.sweep_steps;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else if (experiment == "zn") {
        ZnConfig c = zn_config(config);
        j["orders"] = c.orders;
        j["tolerances"] = tolerances_json(c.tolerances);
    } else {
        throw ValidationError("unknown experiment '" + experiment +
                              "'; expected one of gedanken, mz, theorem1, flatness, "
                              "grating, ellipse, zn");
    }
    return j;
}

}  // namespace

ExperimentResult dispatch(const RunOptions& options) {
    const std::string& e = options.experiment;
    if (e == "gedanken") {
        GedankenConfig c = gedanken_config(options.config);
        c.threads = options.threads;
        return run_gedanken(c, options.seed);
    }
    if (e == "mz") {
        MachZehnderConfig c = mach_zehnder_config(options.config);
        c.threads = options.threads;
        return run_mach_zehnder(c, options.seed);
    }
    if (e == "theorem1") return run_theorem1_suite(theorem1_config(options.config), options.seed);
    if (e == "flatness") return run_flatness(flatness_config(options.config), options.seed);
    if (e == "grating") return run_grating_flux(grating_config(options.config), options.seed);
    if (e == "ellipse")
        return run_conservation_suite(conservation_config(options.config), options.seed);
    if (e == "zn") return run_zn(zn_config(options.config), options.seed);
    throw ValidationError("unknown experiment '" + e +
                          "'; expected one of gedanken, mz, theorem1, flatness, "
                          "grating, ellipse, zn");
}

std::string result_to_json(const ExperimentResult& result, const RunOptions& options) {
    Json j;
    j["experiment"] = result.experiment;
    j["version"] = kVersion;
    j["seed"] = result.seed;
    j["config"] = effective_config(result.experiment, options.config, options.threads);
    j["all_pass"] = result.all_pass();
    Json verdicts = Json::array();
    for (const auto& v : result.verdicts) {
        Json e;
        e["name"] = v.name;
        e["value"] = v.value;
        e["tolerance"] = v.tolerance;
        e["pass"] = v.pass;
        verdicts.push_back(e);
    }
    j["verdicts"] = verdicts;
    Json scalars = Json::object();
    for (const auto& [k, v] : result.scalars) scalars[k] = v;
    j["scalars"] = scalars;
    Json prov = Json::object();
    for (const auto& [k, v] : result.provenance) prov[k] = v;
    j["provenance"] = prov;
    j["warnings"] = result.warnings;
    Json records = Json::array();
    for (const auto& rec : result.records) {
        Json e;
        e["name"] = rec.name;
        for (const auto& [k, v] : rec.fields) e[k] = v;
        records.push_back(e);
    }
    j["records"] = records;
    Json tables = Json::array();
    for (const auto& t : result.tables) {
        Json e;
        e["name"] = t.name;
        e["axis_label"] = t.axis_label;
        e["axis"] = t.axis;
        e["density"] = t.density;
        tables.push_back(e);
    }
    j["tables"] = tables;
    return j.dump(2) + "\n";
}

namespace {

void append_number(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

// Write-to-temp-then-rename so a crash never leaves a truncated file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw ValidationError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::string table_to_csv(const Table& table) {
    std::string out = table.axis_label + ",density\n";
    for (size_t i = 0; i < table.axis.size(); ++i) {
        append_number(out, table.axis[i]);
        out.push_back(',');
        append_number(out, i < table.density.size() ? table.density[i] : 0.0);
        out.push_back('\n');
    }
    return out;
}

std::vector<std::string> write_outputs(const ExperimentResult& result,
                                       const RunOptions& options) {
    namespace fs = std::filesystem;
    const fs::path dir(options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string());

    std::vector<std::string> written;
    const fs::path summary = dir / (result.experiment + "_summary.json");
    atomic_write(summary, result_to_json(result, options));
    written.push_back(summary.string());

    if (options.format == "csv" || options.format == "both") {
        for (const auto& t : result.tables) {
            const fs::path p = dir / (result.experiment + "_" + t.name + ".csv");
            atomic_write(p, table_to_csv(t));
            written.push_back(p.string());
        }
    }
    return written;
}

}  // namespace modvar
