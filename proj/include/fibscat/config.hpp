#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fibscat/grid.hpp"
#include "fibscat/model.hpp"
#include "fibscat/scattering.hpp"

namespace fibscat {

/// Flat `key = value` configuration. Lines starting with '#' are comments;
/// later assignments replace earlier ones.
class ConfigMap {
public:
    static ConfigMap parse(std::istream& is, std::string_view source = "<stream>");
    static ConfigMap load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    /// Applies a `key=value` override.
    void assign(std::string_view assignment);
    /// Entries of `other` replace entries here.
    void merge(const ConfigMap& other);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::optional<std::string> find(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

std::vector<std::string> preset_names();
/// Model and grid keys of a named preset (polaron, nelson, relativistic).
ConfigMap preset(std::string_view name);

/// Preset (if `preset` is set) overlaid by the file, then by the overrides.
ConfigMap resolve_config(const ConfigMap& file, const std::vector<std::string>& overrides = {});

double parse_real(std::string_view text, std::string_view key);
std::vector<double> parse_real_list(std::string_view text, std::string_view key, char separator = ';');

/// How the test state of a run is built.
struct StateSpec {
    std::string kind = "wavepacket";  // wavepacket, mass-shell, vacuum, random, file
    std::vector<double> k0;           // packet center (momentum), defaults to 0
    std::vector<double> x0;           // packet center (position), defaults to 0
    double width = 0.25;              // momentum standard deviation
    double vacuum = 0.0;              // vacuum amplitude before normalization
    int count = 1;                    // number of random states
    std::string file;
    bool normalize = true;
};

struct MourreSpec {
    std::vector<double> lambdas;
    double kappa = 0.05;
    std::vector<double> P0;  // empty: P0 = P
};

struct PropagationSpec {
    ObservableKind kind = ObservableKind::large_velocity;
    double lo = 0.0;  // 0: derived from the state
    double hi = 0.0;
    int component = 0;
    bool vacuum_block = true;
};

struct ExperimentConfig {
    ExperimentConfig(ConfigMap raw_config, DispersionModel dispersion)
        : raw(std::move(raw_config)), model(std::move(dispersion)) {}

    ConfigMap raw;
    DispersionModel model;
    int grid_n = 1024;
    double grid_kmax = 8.0;
    std::string command;
    std::vector<std::vector<double>> P;
    std::vector<double> deltas;
    TimeSchedule schedule;
    std::uint64_t seed = 1;
    std::string out;
    StateSpec state;
    MourreSpec mourre;
    PropagationSpec propagation;
    double tolerance = 1e-6;  // wave-operator Cauchy tolerance
    BoundaryMonitor monitor;

    MomentumGrid grid() const { return build_grid(model.nu(), grid_n, grid_kmax); }
};

const std::vector<std::string>& command_names();

/// Builds and validates the experiment; configuration errors throw.
ExperimentConfig build_experiment(const ConfigMap& config);

DispersionModel build_model(const ConfigMap& config);

}  // namespace fibscat
