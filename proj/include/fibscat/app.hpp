#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fibscat/config.hpp"

namespace fibscat {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct RunReport {
    std::string command;
    Table table;
    nlohmann::json json;
    std::vector<std::string> summary;  // one line per P (or per clause for validate)
    bool convergence_failure = false;
};

/// %.17g, with "nan"/"inf" spelled out.
std::string format_real(double x);

/// Test state number `index` for fiber P as described by `spec`.
FiberState make_state(const StateSpec& spec, const DispersionModel& model, const MomentumGrid& grid,
                      std::span<const double> P, std::uint64_t seed, int index = 0);

/// Runs the configured command over the P list. Per-fiber failures become
/// data; configuration errors throw.
RunReport execute(const ExperimentConfig& config);

void write_csv(std::ostream& os, const ExperimentConfig& config, const RunReport& report);
void write_json(std::ostream& os, const ExperimentConfig& config, const RunReport& report);

/// execute + write <out>.csv and <out>.json + summary lines on `log`.
/// Returns 0 on success and 2 when any convergence check failed.
int run(const ExperimentConfig& config, std::ostream& log);

}  // namespace fibscat
