#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "modvar/experiments.hpp"
#include "modvar/version.hpp"

namespace modvar {

using Json = nlohmann::ordered_json;

// Everything a run needs: experiment name, reproducibility knobs, output
// destination, and the raw per-experiment config block (validated when the
// typed config is built).
struct RunOptions {
    std::string experiment;
    std::uint64_t seed = kDefaultSeed;
    std::string out_dir = "modvar_out";
    std::string format = "json";  // json | csv | both
    int threads = 1;
    Json config = Json::object();
};

// Parses a manifest document. Top-level keys: experiment, seed, out, format,
// threads, config, tolerances. Unknown keys anywhere raise ValidationError
// naming the offending key; malformed JSON raises ParseError.
RunOptions parse_manifest(const std::string& text);

// Typed config builders; reject unknown keys and out-of-range values.
GedankenConfig gedanken_config(const Json& config);
MachZehnderConfig mach_zehnder_config(const Json& config);
Theorem1Config theorem1_config(const Json& config);
FlatnessConfig flatness_config(const Json& config);
GratingConfig grating_config(const Json& config);
ConservationConfig conservation_config(const Json& config);
ZnConfig zn_config(const Json& config);

// Runs the experiment named in options (ValidationError for unknown names).
ExperimentResult dispatch(const RunOptions& options);

// Deterministic serializations: no timestamps, stable key order, shortest
// round-trip float formatting.
std::string result_to_json(const ExperimentResult& result,
                           const RunOptions& options);
std::string table_to_csv(const Table& table);

// Writes summary.json and one CSV per table (per format selection) into
// options.out_dir, creating it if needed. Each file is written to a temporary
// name and renamed into place, so readers never observe partial files.
// Returns the list of paths written.
std::vector<std::string> write_outputs(const ExperimentResult& result,
                                       const RunOptions& options);

}  // namespace modvar
