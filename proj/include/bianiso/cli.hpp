#pragma once

// Batch front end: declarative run configuration, validation diagnostics,
// and the sweep driver that writes CSV tables and a JSON sidecar.

#include "bianiso/stack_solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bianiso::cli {

enum class RunMode { scattering, initial_value, time_reconstruction };

const char* to_string(RunMode m);
std::optional<RunMode> parse_mode(const std::string& name);

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    int line = 0;  // 1-based; 0 when unknown
    std::string field;
    std::string message;

    std::string str(const std::string& path) const;
};

bool has_errors(const std::vector<Diagnostic>& d);

struct Sweep {
    double omega_min = 1.0;
    double omega_max = 1.0;
    int omega_count = 1;
    std::vector<double> angles_deg;  // either angles ...
    double azimuth_deg = 0.0;
    std::vector<KParallel> kpar;     // ... or explicit k∥ values
};

// Initial fields D(z, 0) = d g(z), B(z, 0) = b g(z) with a Gaussian envelope
// g(z) = exp(-(z - center)² / (2 width²)).
struct InitialPulse {
    double center = 0.0;
    double width = 1.0;
    Vec3 d = Vec3::Zero();
    Vec3 b = Vec3::Zero();
};

struct ZGrid {
    double min = 0.0;
    double max = 0.0;
    int count = 1;
};

struct TimeSettings {
    double d_omega = 0.1;
    int count = 2;
    std::vector<double> probes;
    double t_min = 0.0;
    double t_max = 0.0;
    int t_count = 1;
    bool raised_cosine = false;
};

struct Tolerances {
    double spectrum_edge = 1e-6;
};

struct OutputSettings {
    std::string directory = "out";
    std::string stem = "result";
    bool json = true;
};

struct RunConfig {
    std::string path;
    std::string text;  // raw file contents (hashed into the sidecar)
    std::string unit_name = "normalized";
    UnitSystem units = UnitSystem::normalized();
    RunMode mode = RunMode::scattering;
    std::uint64_t seed = 0;
    std::map<std::string, medium::SusceptibilitySet> materials;
    stack::LayerStack stack;
    std::vector<std::string> layer_names;  // material per region, for messages
    Sweep sweep;
    InitialPulse pulse;
    ZGrid zgrid;
    TimeSettings time;
    Tolerances tolerances;
    OutputSettings output;
};

struct LoadResult {
    std::optional<RunConfig> config;
    std::vector<Diagnostic> diagnostics;
};

struct Overrides {
    std::optional<std::string> output_dir;
    std::optional<RunMode> mode;
    std::optional<std::uint64_t> seed;
};

// Structural and semantic checks without running the solver. Throws
// std::runtime_error when the file cannot be read.
LoadResult load_config(const std::string& path, const Overrides& overrides = {});
std::vector<Diagnostic> validate(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

struct RunOptions {
    Overrides overrides;
    int threads = 1;
    bool validate_only = false;
};

enum ExitCode { exit_ok = 0, exit_invalid_config = 2, exit_numerical_failure = 3 };

// Full pipeline; diagnostics and progress go to `err`.
int run(const std::string& config_path, const RunOptions& options, std::ostream& err);

}  // namespace bianiso::cli
