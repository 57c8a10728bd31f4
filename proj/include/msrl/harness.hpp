#pragma once

#include <string>
#include <vector>

#include "msrl/datagen.hpp"
#include "msrl/tuning.hpp"

namespace msrl {

/// One replication-level result row, ready for metrics.csv.
struct RepMetrics {
    int rep = 0;
    std::string method;
    double lambda = 0.0;
    Metrics metrics;
    double seconds = 0.0;
};

struct HarnessConfig {
    std::size_t n_lambda = 100;
    double lambda_min_ratio = 1e-4;
    double c = 1.01;            // pivotal constant for quantile tuning
    std::size_t mc_draws = 5000;
    bool refit_direct = false;  // refit the quantile-tuned estimators
    SolverConfigs solvers;
};

/// Method names: "msr-cv", "msr-q50", "msr-q75", "msr-q85", "msr-q95",
/// "pls", "calibrated". Throws data_error listing the valid names otherwise.
void validate_method_names(const std::vector<std::string>& methods);

/// Replication loop over a simulation design. "msr-cv", "pls" and
/// "calibrated" pick lambda by minimizing squared prediction error on the
/// instance's validation set over a solution path; "msr-q*" use pivotal
/// Monte-Carlo quantile tuning. Replications run in parallel with derived
/// per-replication seeds; the output order is deterministic.
std::vector<RepMetrics> run_replications(const SimDesign& design,
                                         const std::vector<std::string>& methods,
                                         int reps, const HarnessConfig& cfg);

} // namespace msrl
