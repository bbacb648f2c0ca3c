#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace flowsel {

// One classified flow within an epoch.
struct Outcome {
    bool accepted = false;
    uint16_t predicted = 0;
    int32_t true_class = -1;  // -1 when the label is withheld
    double score = 0.0;
};

// Per-flow outcomes of one home on one day, plus the device sets they induce:
// predicted = classes with at least one accepted prediction, truth = classes
// present among the day's labels.
struct EpochResult {
    std::string home_id;
    int epoch_day = 0;
    std::vector<Outcome> outcomes;
    std::set<int32_t> predicted_set;
    std::set<int32_t> true_set;
};

EpochResult make_epoch_result(std::string home_id, int epoch_day,
                              std::vector<Outcome> outcomes);

// Mean over classes (among accepted outcomes that carry a true label) of the
// per-class correct rate. Classes with no accepted labeled flow are excluded
// from the mean. Throws NoAccepted when nothing qualifies.
double macro_accuracy(std::span<const Outcome> outcomes);

struct SetF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Set precision/recall/F1 between the predicted and true device sets. An
// empty predicted set counts as vacuously precise (precision 1); F1 is 0
// whenever precision + recall is 0. The true set must be non-empty.
SetF1 set_f1(const std::set<int32_t>& predicted, const std::set<int32_t>& truth);

// A_selected / A_ideal. May exceed 1 under static selection; throws
// DivisionByZero when the ideal metric is 0.
double ratio_to_ideal(double selected, double ideal);

struct DayComparison {
    int wins = 0;    // dynamic strictly higher
    int losses = 0;  // dynamic strictly lower
    int ties = 0;

    DayComparison& operator+=(const DayComparison& o) {
        wins += o.wins;
        losses += o.losses;
        ties += o.ties;
        return *this;
    }
};

// Elementwise comparison of two daily series keyed by epoch_day. Days absent
// in either series are skipped; equality tolerance 1e-12.
DayComparison compare_days(const std::map<int, double>& dynamic_series,
                           const std::map<int, double>& static_series);

}  // namespace flowsel
