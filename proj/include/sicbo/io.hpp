#pragma once

#include <string>

#include <json.hpp>

#include "sicbo/solver.hpp"
#include "sicbo/testbed.hpp"

// JSON/CSV emission. Reports embed the fully resolved config and seed so a
// run can be reproduced bit-for-bit from its own output; numeric CSV cells
// are written with round-trip precision.

namespace sicbo::io {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json config_to_json(const SicboConfig& config);
SicboConfig config_from_json(const nlohmann::json& j);

// include_factors additionally emits the per-iteration realized contraction
// factors (shared-noise runs), which can dominate the file size.
nlohmann::json report_to_json(const RunReport& report, bool include_factors = false);

std::string format_double(double v);  // shortest round-trip decimal

struct BenchRow {
    std::string function;
    int n_particles = 0;
    double beta = 0.0;
    ExperimentSummary summary;
    std::uint64_t base_seed = 0;
};

// Schema: function,N,beta,suc_rat,sol_err,fun_err,n_trials,base_seed
std::string bench_csv(const std::vector<BenchRow>& rows);

void write_file(const std::string& path, const std::string& content);

}  // namespace sicbo::io
