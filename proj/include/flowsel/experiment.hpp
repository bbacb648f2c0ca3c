#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flowsel/dataset.hpp"
#include "flowsel/forest.hpp"
#include "flowsel/metrics.hpp"
#include "flowsel/selection.hpp"

namespace flowsel {

// One selection strategy inside an experiment, plus how it is judged:
// `ideal` names the label-based policy whose aggregate is the ratio
// denominator, `static_twin` names the static counterpart used for the
// daily win/tie/loss accounting.
struct PolicySpec {
    std::string name;
    SelectionPolicy policy;
    std::string ideal;
    std::string static_twin;
};

struct ExperimentConfig {
    int n_seen = 5;
    int n_runs = 10;
    int split_day = 30;
    int window_days = 30;
    uint64_t seed = 1;
    ForestHyperparams hyperparams;  // rng_seed is re-derived per run
    std::vector<PolicySpec> policies;  // empty = default_policies()
};

// The full strategy grid: the global model, oracle selection over
// contextualized models with and without the global candidate (static and
// dynamic), the four distance metrics, and the random baseline.
std::vector<PolicySpec> default_policies(int window_days);

struct PolicyDayMetric {
    std::string home_id;
    int epoch_day = 0;
    std::string model_id;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct PolicyReport {
    std::string name;
    std::vector<PolicyDayMetric> daily;  // evaluated home-days, sorted
    std::vector<std::pair<std::string, double>> home_accuracy;
    std::vector<std::pair<std::string, double>> home_f1;
    double aggregate_accuracy = 0.0;  // mean of the per-home entries
    double aggregate_f1 = 0.0;
    std::optional<double> ratio_accuracy;
    std::optional<double> ratio_f1;
    bool ratio_exceeds_one = false;
    std::optional<DayComparison> dynamic_vs_static;
};

struct RunReport {
    int run_id = 0;
    std::vector<std::string> seen_homes;
    std::vector<std::string> unseen_homes;
    std::vector<PolicyReport> policies;

    const PolicyReport* find_policy(const std::string& name) const;
};

// Runs the full protocol: per run, a seed-derived random seen/unseen home
// partition, registry training on the seen homes' pre-split data, and every
// policy evaluated on the unseen homes' post-split days. Deterministic in
// config.seed. Throws ConfigError on impossible partitions.
std::vector<RunReport> run_experiment(const Dataset& data, const ExperimentConfig& config);

// Machine-readable per-run CSV (scopes: day, home, run).
void write_run_report_csv(std::ostream& out, const RunReport& report);

// Human-readable accuracy / day-comparison / ratio tables across runs.
void write_summary(std::ostream& out, const std::vector<RunReport>& reports,
                   const std::string& fingerprint);

}  // namespace flowsel
