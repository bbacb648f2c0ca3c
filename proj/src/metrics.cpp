#include "flowsel/metrics.hpp"

#include <cmath>

#include "flowsel/errors.hpp"

namespace flowsel {

EpochResult make_epoch_result(std::string home_id, int epoch_day,
                              std::vector<Outcome> outcomes) {
    EpochResult e;
    e.home_id = std::move(home_id);
    e.epoch_day = epoch_day;
    e.outcomes = std::move(outcomes);
    for (const auto& o : e.outcomes) {
        if (o.accepted) e.predicted_set.insert(o.predicted);
        if (o.true_class >= 0) e.true_set.insert(o.true_class);
    }
    return e;
}

double macro_accuracy(std::span<const Outcome> outcomes) {
    std::map<int32_t, std::pair<uint64_t, uint64_t>> per_class;  // correct, total
    for (const auto& o : outcomes) {
        if (!o.accepted || o.true_class < 0) continue;
        auto& [correct, total] = per_class[o.true_class];
        ++total;
        if (o.predicted == o.true_class) ++correct;
    }
    if (per_class.empty()) throw NoAccepted("no accepted labeled outcome");
    double sum = 0.0;
    for (const auto& [cls, counts] : per_class)
        sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
    return sum / static_cast<double>(per_class.size());
}

SetF1 set_f1(const std::set<int32_t>& predicted, const std::set<int32_t>& truth) {
    if (truth.empty()) throw std::invalid_argument("true device set is empty");
    size_t hits = 0;
    for (int32_t c : predicted) hits += truth.count(c);
    SetF1 r;
    r.precision = predicted.empty()
                      ? 1.0
                      : static_cast<double>(hits) / static_cast<double>(predicted.size());
    r.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
    const double denom = r.precision + r.recall;
    r.f1 = denom == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / denom;
    return r;
}

double ratio_to_ideal(double selected, double ideal) {
    if (ideal <= 0.0) throw DivisionByZero("ideal metric is zero");
    return selected / ideal;
}

DayComparison compare_days(const std::map<int, double>& dynamic_series,
                           const std::map<int, double>& static_series) {
    DayComparison c;
    for (const auto& [day, dyn] : dynamic_series) {
        const auto it = static_series.find(day);
        if (it == static_series.end()) continue;
        const double diff = dyn - it->second;
        if (std::fabs(diff) <= 1e-12)
            ++c.ties;
        else if (diff > 0)
            ++c.wins;
        else
            ++c.losses;
    }
    return c;
}

}  // namespace flowsel
