#include "flowsel/selection.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "flowsel/errors.hpp"
#include "flowsel/rng.hpp"

namespace flowsel {

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

// Macro accuracy from per-class (correct, total) counts; 0 when the model
// accepted nothing so every candidate stays comparable.
double macro_from_counts(const std::vector<uint64_t>& correct,
                         const std::vector<uint64_t>& total) {
    double sum = 0.0;
    size_t present = 0;
    for (size_t c = 0; c < total.size(); ++c) {
        if (total[c] == 0) continue;
        sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
        ++present;
    }
    return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

SelectionChoice oracle_core(std::span<const size_t> candidates,
                            std::span<const double> accuracies) {
    size_t best = 0;
    for (size_t i = 1; i < accuracies.size(); ++i)
        if (accuracies[i] > accuracies[best]) best = i;
    return {candidates[best], "oracle", accuracies[best]};
}

SelectionChoice distance_core(const ModelRegistry& registry,
                              std::span<const size_t> candidates,
                              std::span<const ScoreDistribution> window_dists,
                              DistanceMetric metric) {
    // ES needs at least 5 samples on both sides; degrade to KS for the whole
    // decision so candidates stay comparable.
    DistanceMetric effective = metric;
    if (metric == DistanceMetric::es) {
        bool feasible = true;
        for (size_t i = 0; i < candidates.size() && feasible; ++i) {
            if (window_dists[i].size() < 5 ||
                registry.at(candidates[i]).train_score_dist.size() < 5)
                feasible = false;
        }
        if (!feasible) effective = DistanceMetric::ks;
    }

    size_t best = 0;
    double best_distance = 0.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const auto& train = registry.at(candidates[i]).train_score_dist;
        double d;
        try {
            d = distance(effective, window_dists[i], train);
        } catch (const DegenerateCovariance&) {
            d = 0.0;
        }
        if (i == 0 || d < best_distance) {
            best = i;
            best_distance = d;
        }
    }
    return {candidates[best], metric_name(effective), best_distance};
}

}  // namespace

const char* mode_name(SelectionMode m) {
    switch (m) {
        case SelectionMode::oracle: return "oracle";
        case SelectionMode::distance: return "distance";
        case SelectionMode::random: return "random";
    }
    return "?";
}

const char* regime_name(SelectionRegime r) {
    return r == SelectionRegime::static_once ? "static" : "dynamic";
}

const char* candidate_set_name(CandidateSet c) {
    switch (c) {
        case CandidateSet::contextual_only: return "ctx";
        case CandidateSet::contextual_plus_global: return "ctx+global";
        case CandidateSet::global_only: return "global";
    }
    return "?";
}

SelectionMode mode_from_name(const std::string& s) {
    if (s == "oracle") return SelectionMode::oracle;
    if (s == "distance") return SelectionMode::distance;
    if (s == "random") return SelectionMode::random;
    throw ConfigError("unknown selection policy: " + s);
}

SelectionRegime regime_from_name(const std::string& s) {
    if (s == "static") return SelectionRegime::static_once;
    if (s == "dynamic") return SelectionRegime::dynamic_daily;
    throw ConfigError("unknown regime: " + s);
}

CandidateSet candidate_set_from_name(const std::string& s) {
    if (s == "ctx") return CandidateSet::contextual_only;
    if (s == "ctx+global") return CandidateSet::contextual_plus_global;
    if (s == "global") return CandidateSet::global_only;
    throw ConfigError("unknown candidate set: " + s);
}

void write_assignment_csv(std::ostream& out, const Assignment& assignment) {
    out << "home_id,epoch_day,model_id,metric,distance_or_accuracy\n";
    for (const auto& row : assignment) {
        out << row.home_id << ',' << row.epoch_day << ',' << row.model_id << ','
            << row.metric << ',';
        if (row.value) out << format_double(*row.value);
        out << '\n';
    }
}

HomePredictionCache::HomePredictionCache(const ModelRegistry& registry,
                                         const HomeData& home)
    : registry_(registry), home_(home), per_model_(registry.size()) {}

HomePredictionCache::DayEntry& HomePredictionCache::entry(size_t model, int day) {
    DayEntry& e = per_model_[model][day];
    if (e.ready) return e;
    const auto& cm = registry_.at(model);
    const size_t k = registry_.class_names().size();
    e.counts.correct.assign(k, 0);
    e.counts.total.assign(k, 0);
    const auto it = home_.day_rows.find(day);
    if (it != home_.day_rows.end()) {
        e.predictions.reserve(it->second.size());
        for (uint32_t row : it->second) {
            const auto p = cm.forest.predict(home_.feats[row]);
            e.predictions.push_back(p);
            e.sorted_scores.push_back(p.score);
            const int32_t truth = home_.labels[row];
            if (truth >= 0 && p.score >= cm.thresholds.tau[p.class_index]) {
                ++e.counts.total[truth];
                if (p.class_index == truth) ++e.counts.correct[truth];
            }
        }
        std::sort(e.sorted_scores.begin(), e.sorted_scores.end());
    }
    e.ready = true;
    return e;
}

const std::vector<ScoredPrediction>& HomePredictionCache::day_predictions(size_t model,
                                                                          int day) {
    return entry(model, day).predictions;
}

const std::vector<double>& HomePredictionCache::day_scores(size_t model, int day) {
    return entry(model, day).sorted_scores;
}

const HomePredictionCache::ClassCounts& HomePredictionCache::day_class_counts(
    size_t model, int day) {
    return entry(model, day).counts;
}

std::vector<size_t> candidate_indices(const ModelRegistry& registry, CandidateSet set) {
    const size_t global = registry.global_index();
    std::vector<size_t> out;
    switch (set) {
        case CandidateSet::contextual_only:
            for (size_t i = 0; i < registry.size(); ++i)
                if (i != global) out.push_back(i);
            break;
        case CandidateSet::contextual_plus_global:
            for (size_t i = 0; i < registry.size(); ++i) out.push_back(i);
            break;
        case CandidateSet::global_only:
            if (global == ModelRegistry::npos)
                throw ConfigError("registry has no GLOBAL model");
            out.push_back(global);
            break;
    }
    if (out.empty()) throw ConfigError("empty candidate set");
    return out;
}

SelectionChoice select_oracle(const ModelRegistry& registry,
                              std::span<const size_t> candidates,
                              std::span<const FeatureVector> window,
                              std::span<const int32_t> labels) {
    bool any_label = false;
    for (int32_t l : labels)
        if (l >= 0) any_label = true;
    if (window.empty() || !any_label)
        throw NoData("oracle selection needs a labeled window");

    const size_t k = registry.class_names().size();
    std::vector<double> accuracies(candidates.size(), 0.0);
    for (size_t i = 0; i < candidates.size(); ++i) {
        const auto& cm = registry.at(candidates[i]);
        std::vector<uint64_t> correct(k, 0);
        std::vector<uint64_t> total(k, 0);
        for (size_t r = 0; r < window.size(); ++r) {
            if (labels[r] < 0) continue;
            const auto p = cm.forest.predict(window[r]);
            if (p.score < cm.thresholds.tau[p.class_index]) continue;
            ++total[labels[r]];
            if (p.class_index == labels[r]) ++correct[labels[r]];
        }
        accuracies[i] = macro_from_counts(correct, total);
    }
    return oracle_core(candidates, accuracies);
}

SelectionChoice select_by_distance(const ModelRegistry& registry,
                                   std::span<const size_t> candidates,
                                   std::span<const FeatureVector> window,
                                   DistanceMetric metric) {
    if (window.empty()) throw NoData("distance selection needs a non-empty window");
    std::vector<ScoreDistribution> dists;
    dists.reserve(candidates.size());
    for (size_t idx : candidates) {
        std::vector<double> scores;
        scores.reserve(window.size());
        for (const auto& f : window)
            scores.push_back(registry.at(idx).forest.predict(f).score);
        dists.emplace_back(std::move(scores));
    }
    return distance_core(registry, candidates, dists, metric);
}

SelectionChoice select_random(std::span<const size_t> candidates, uint64_t seed,
                              uint64_t draw_index) {
    if (candidates.empty()) throw NoData("no candidates");
    SplitMix64 rng(derive_seed(seed, "random-select", draw_index));
    return {candidates[rng.uniform_below(candidates.size())], "random", std::nullopt};
}

namespace {

// Days of the home with flows inside (first, last], ascending.
std::vector<int> window_days_with_flows(const HomeData& home, int first_exclusive,
                                        int last_inclusive) {
    std::vector<int> days;
    auto it = home.day_rows.upper_bound(first_exclusive);
    for (; it != home.day_rows.end() && it->first <= last_inclusive; ++it)
        days.push_back(it->first);
    return days;
}

size_t fallback_candidate(const ModelRegistry& registry,
                          std::span<const size_t> candidates) {
    const size_t global = registry.global_index();
    for (size_t c : candidates)
        if (c == global) return c;
    return candidates.front();
}

// Selection over the cached window days, dispatching on the policy mode.
SelectionChoice select_over_days(const SelectionPolicy& policy,
                                 HomePredictionCache& cache,
                                 std::span<const size_t> candidates,
                                 std::span<const int> days, uint64_t draw_index) {
    const ModelRegistry& registry = cache.registry();
    switch (policy.mode) {
        case SelectionMode::oracle: {
            const size_t k = registry.class_names().size();
            std::vector<double> accuracies(candidates.size(), 0.0);
            bool any_total = false;
            for (size_t i = 0; i < candidates.size(); ++i) {
                std::vector<uint64_t> correct(k, 0);
                std::vector<uint64_t> total(k, 0);
                for (int day : days) {
                    const auto& counts = cache.day_class_counts(candidates[i], day);
                    for (size_t c = 0; c < k; ++c) {
                        correct[c] += counts.correct[c];
                        total[c] += counts.total[c];
                    }
                }
                for (uint64_t t : total) any_total = any_total || t > 0;
                accuracies[i] = macro_from_counts(correct, total);
            }
            if (!any_total) {
                // Nothing accepted anywhere, or the window is unlabeled.
                bool any_label = false;
                for (int day : days) {
                    const auto it = cache.home().day_rows.find(day);
                    if (it == cache.home().day_rows.end()) continue;
                    for (uint32_t row : it->second)
                        if (cache.home().labels[row] >= 0) any_label = true;
                }
                if (!any_label) throw NoData("window has no labels");
            }
            return oracle_core(candidates, accuracies);
        }
        case SelectionMode::distance: {
            std::vector<ScoreDistribution> dists;
            dists.reserve(candidates.size());
            for (size_t idx : candidates) {
                std::vector<double> merged;
                for (int day : days) {
                    const auto& scores = cache.day_scores(idx, day);
                    merged.insert(merged.end(), scores.begin(), scores.end());
                }
                dists.emplace_back(std::move(merged));
            }
            return distance_core(registry, candidates, dists, policy.metric);
        }
        case SelectionMode::random:
            return select_random(candidates, policy.random_seed, draw_index);
    }
    throw std::logic_error("unknown selection mode");
}

}  // namespace

Assignment run_static(const SelectionPolicy& policy, HomePredictionCache& cache,
                      int split_day, int end_day) {
    const ModelRegistry& registry = cache.registry();
    const HomeData& home = cache.home();
    const auto candidates = candidate_indices(registry, policy.candidates);
    const auto window = window_days_with_flows(home, -1, split_day - 1);

    SelectionChoice choice;
    if (window.empty()) {
        choice = {fallback_candidate(registry, candidates), "fallback", std::nullopt};
    } else {
        try {
            choice = select_over_days(policy, cache, candidates, window,
                                      detail::fnv1a64(home.home_id));
        } catch (const NoData&) {
            choice = {fallback_candidate(registry, candidates), "fallback", std::nullopt};
        }
    }

    Assignment out;
    for (int t = split_day; t <= end_day; ++t)
        out.push_back({home.home_id, t, registry.at(choice.candidate).model_id,
                       choice.metric_used, choice.value});
    return out;
}

Assignment run_dynamic(const SelectionPolicy& policy, HomePredictionCache& cache,
                       int split_day, int end_day) {
    const ModelRegistry& registry = cache.registry();
    const HomeData& home = cache.home();
    const auto candidates = candidate_indices(registry, policy.candidates);

    Assignment out;
    std::optional<SelectionChoice> previous;
    for (int t = split_day; t <= end_day; ++t) {
        const auto window = window_days_with_flows(home, t - policy.window_days, t);
        SelectionChoice choice;
        if (window.empty()) {
            if (previous)
                choice = {previous->candidate, "retained", std::nullopt};
            else
                choice = {fallback_candidate(registry, candidates), "fallback",
                          std::nullopt};
        } else {
            const uint64_t draw =
                detail::fnv1a64(home.home_id) ^ static_cast<uint64_t>(t);
            try {
                choice = select_over_days(policy, cache, candidates, window, draw);
            } catch (const NoData&) {
                if (previous)
                    choice = {previous->candidate, "retained", std::nullopt};
                else
                    choice = {fallback_candidate(registry, candidates), "fallback",
                              std::nullopt};
            }
        }
        out.push_back({home.home_id, t, registry.at(choice.candidate).model_id,
                       choice.metric_used, choice.value});
        previous = choice;
    }
    return out;
}

Assignment run_selection(const SelectionPolicy& policy, HomePredictionCache& cache,
                         int split_day, int end_day) {
    return policy.regime == SelectionRegime::static_once
               ? run_static(policy, cache, split_day, end_day)
               : run_dynamic(policy, cache, split_day, end_day);
}

}  // namespace flowsel
