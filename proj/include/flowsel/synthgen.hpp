#pragma once

#include <cstdint>
#include <string>

namespace flowsel {

// Controls for the synthetic multi-home flow generator. Class behavior is a
// Gaussian blob per feature dimension; spatial drift shifts each context's
// blobs along fixed per-class directions, temporal drift adds a further
// shift from drift_day onward. drift_delta uses the same unit as
// context_offset_scale, so drift_delta == context_offset_scale moves a
// context exactly onto its neighbour.
struct DriftSpec {
    int n_homes = 12;
    int n_classes = 24;
    int days = 47;
    double flows_per_class_per_day = 83.0;  // Poisson mean per home-day-class
    int n_contexts = 0;           // 0: every home is its own context, else home % n_contexts
    double context_offset_scale = 0.0;  // spatial drift strength
    int drift_day = -1;           // first drifted day in [0, days]; -1 disables drift
    double drift_delta = 0.0;     // temporal drift strength, applied from drift_day on
    double noise_sigma = 0.08;    // per-dimension noise, fraction of the feature range
    uint64_t seed = 1;

    // Effective first drifted day; "disabled" behaves like drifting at `days`.
    int effective_drift_day() const { return drift_day < 0 ? days : drift_day; }
    void validate() const;
};

// Key=value spec file, one entry per line; '#' starts a comment. Unknown
// keys are rejected.
DriftSpec load_drift_spec(const std::string& path);

// Writes one labeled flow CSV per home ("home<NN>.csv") under out_dir.
// Deterministic per seed: per-home generation runs on independent derived
// streams and every row satisfies the flow-record invariants.
void generate_dataset(const DriftSpec& spec, const std::string& out_dir);

}  // namespace flowsel
