#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowsel/dataset.hpp"
#include "flowsel/distances.hpp"
#include "flowsel/registry.hpp"

namespace flowsel {

enum class SelectionMode { oracle, distance, random };
enum class SelectionRegime { static_once, dynamic_daily };
enum class CandidateSet { contextual_only, contextual_plus_global, global_only };

struct SelectionPolicy {
    SelectionMode mode = SelectionMode::distance;
    DistanceMetric metric = DistanceMetric::ks;  // distance mode only
    uint64_t random_seed = 0;                    // random mode only
    CandidateSet candidates = CandidateSet::contextual_plus_global;
    SelectionRegime regime = SelectionRegime::dynamic_daily;
    int window_days = 30;
};

const char* mode_name(SelectionMode m);
const char* regime_name(SelectionRegime r);
const char* candidate_set_name(CandidateSet c);
SelectionMode mode_from_name(const std::string& s);
SelectionRegime regime_from_name(const std::string& s);
CandidateSet candidate_set_from_name(const std::string& s);

// One chosen model per (home, test day). Static assignments repeat one id.
struct AssignmentRow {
    std::string home_id;
    int epoch_day = 0;
    std::string model_id;
    std::string metric;  // "oracle", a distance name, "random", "retained", "fallback"
    std::optional<double> value;  // window accuracy or winning distance
};
using Assignment = std::vector<AssignmentRow>;

// CSV schema: home_id,epoch_day,model_id,metric,distance_or_accuracy
void write_assignment_csv(std::ostream& out, const Assignment& assignment);

// Memoizes, per (model, day), the raw predictions of one home's flows under
// every registry model, the sorted score sample, and the per-class
// accepted-correct counts used by oracle selection. Shared by selection and
// evaluation so each flow is classified once per model.
class HomePredictionCache {
public:
    HomePredictionCache(const ModelRegistry& registry, const HomeData& home);

    const ModelRegistry& registry() const { return registry_; }
    const HomeData& home() const { return home_; }

    // Raw per-row predictions of model m for the given day (row order).
    const std::vector<ScoredPrediction>& day_predictions(size_t model, int day);

    // Ascending scores of model m over the day's flows.
    const std::vector<double>& day_scores(size_t model, int day);

    // (correct, total) accepted counts per true class for model m on a day.
    struct ClassCounts {
        std::vector<uint64_t> correct;
        std::vector<uint64_t> total;
    };
    const ClassCounts& day_class_counts(size_t model, int day);

private:
    struct DayEntry {
        bool ready = false;
        std::vector<ScoredPrediction> predictions;
        std::vector<double> sorted_scores;
        ClassCounts counts;
    };
    DayEntry& entry(size_t model, int day);

    const ModelRegistry& registry_;
    const HomeData& home_;
    std::vector<std::map<int, DayEntry>> per_model_;
};

struct SelectionChoice {
    size_t candidate = 0;      // index into the registry
    std::string metric_used;   // actual criterion ("ks" on an ES fallback day)
    std::optional<double> value;  // accuracy (oracle) or distance (distance mode)
};

// Candidate registry indices for a candidate set, in registry order.
std::vector<size_t> candidate_indices(const ModelRegistry& registry, CandidateSet set);

// Label-based selection: argmax of macro accuracy over the window's accepted
// predictions; ties go to the earlier candidate in registry order. Throws
// NoData on an empty or fully unlabeled window.
SelectionChoice select_oracle(const ModelRegistry& registry,
                              std::span<const size_t> candidates,
                              std::span<const FeatureVector> window,
                              std::span<const int32_t> labels);

// Score-distribution selection: scores the window with each candidate,
// measures the distance to the candidate's training score distribution, and
// returns the argmin. Ties go to registry order. Never sees labels. Windows
// (or training distributions) below 5 samples fall back from ES to KS; a
// degenerate ES covariance counts as distance 0.
SelectionChoice select_by_distance(const ModelRegistry& registry,
                                   std::span<const size_t> candidates,
                                   std::span<const FeatureVector> window,
                                   DistanceMetric metric);

// Uniform reproducible pick: the same (seed, draw_index) always yields the
// same candidate.
SelectionChoice select_random(std::span<const size_t> candidates, uint64_t seed,
                              uint64_t draw_index);

// Chooses once on the assignment window (the home's data before split_day)
// and repeats that model for every test day in [split_day, end_day]. An
// empty window falls back to GLOBAL (or the first candidate when GLOBAL is
// excluded).
Assignment run_static(const SelectionPolicy& policy, HomePredictionCache& cache,
                      int split_day, int end_day);

// Re-selects per test day over the flows in (t - window_days, t]. A day
// whose window is empty keeps the previous day's choice; before any choice
// exists the fallback is GLOBAL (or the first candidate).
Assignment run_dynamic(const SelectionPolicy& policy, HomePredictionCache& cache,
                       int split_day, int end_day);

Assignment run_selection(const SelectionPolicy& policy, HomePredictionCache& cache,
                         int split_day, int end_day);

}  // namespace flowsel
