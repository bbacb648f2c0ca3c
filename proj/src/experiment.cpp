#include "flowsel/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

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

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

PolicySpec make_policy(std::string name, SelectionMode mode, DistanceMetric metric,
                       CandidateSet candidates, SelectionRegime regime,
                       int window_days, std::string ideal, std::string twin) {
    PolicySpec spec;
    spec.name = std::move(name);
    spec.policy.mode = mode;
    spec.policy.metric = metric;
    spec.policy.candidates = candidates;
    spec.policy.regime = regime;
    spec.policy.window_days = window_days;
    spec.ideal = std::move(ideal);
    spec.static_twin = std::move(twin);
    return spec;
}

}  // namespace

std::vector<PolicySpec> default_policies(int window_days) {
    using enum SelectionMode;
    using enum SelectionRegime;
    using enum CandidateSet;
    const auto ks = DistanceMetric::ks;
    std::vector<PolicySpec> out;
    out.push_back(make_policy("global", random, ks, global_only, static_once,
                              window_days, "oracle-static", ""));
    out.push_back(make_policy("oracle-ctx-static", oracle, ks, contextual_only,
                              static_once, window_days, "oracle-static", ""));
    out.push_back(make_policy("oracle-static", oracle, ks, contextual_plus_global,
                              static_once, window_days, "oracle-static", ""));
    out.push_back(make_policy("oracle-dynamic", oracle, ks, contextual_plus_global,
                              dynamic_daily, window_days, "oracle-dynamic",
                              "oracle-static"));
    for (DistanceMetric m : {DistanceMetric::ks, DistanceMetric::kr, DistanceMetric::es,
                             DistanceMetric::js}) {
        const std::string base = metric_name(m);
        out.push_back(make_policy(base + "-static", distance, m, contextual_plus_global,
                                  static_once, window_days, "oracle-static", ""));
        out.push_back(make_policy(base + "-dynamic", distance, m, contextual_plus_global,
                                  dynamic_daily, window_days, "oracle-dynamic",
                                  base + "-static"));
    }
    out.push_back(make_policy("rnd-static", random, ks, contextual_plus_global,
                              static_once, window_days, "oracle-static", ""));
    out.push_back(make_policy("rnd-dynamic", random, ks, contextual_plus_global,
                              dynamic_daily, window_days, "oracle-dynamic",
                              "rnd-static"));
    return out;
}

const PolicyReport* RunReport::find_policy(const std::string& name) const {
    for (const auto& p : policies)
        if (p.name == name) return &p;
    return nullptr;
}

namespace {

struct RunContext {
    const Dataset& data;
    const ExperimentConfig& config;
    int end_day;
};

PolicyReport evaluate_policy(const RunContext& ctx, const PolicySpec& spec,
                             const ModelRegistry& registry,
                             std::vector<std::unique_ptr<HomePredictionCache>>& caches,
                             const std::vector<const HomeData*>& unseen,
                             uint64_t random_seed) {
    PolicyReport report;
    report.name = spec.name;
    SelectionPolicy policy = spec.policy;
    policy.random_seed = random_seed;

    for (size_t h = 0; h < unseen.size(); ++h) {
        const HomeData& home = *unseen[h];
        HomePredictionCache& cache = *caches[h];
        const Assignment assignment =
            run_selection(policy, cache, ctx.config.split_day, ctx.end_day);

        double acc_sum = 0.0;
        double f1_sum = 0.0;
        size_t n_days = 0;
        for (const auto& row : assignment) {
            const auto day_it = home.day_rows.find(row.epoch_day);
            if (day_it == home.day_rows.end()) continue;  // inactive day

            size_t model_idx = ModelRegistry::npos;
            for (size_t m = 0; m < registry.size(); ++m)
                if (registry.at(m).model_id == row.model_id) model_idx = m;
            const auto& cm = registry.at(model_idx);
            const auto& predictions = cache.day_predictions(model_idx, row.epoch_day);

            std::vector<Outcome> outcomes;
            outcomes.reserve(predictions.size());
            for (size_t i = 0; i < predictions.size(); ++i) {
                const auto& p = predictions[i];
                Outcome o;
                o.predicted = p.class_index;
                o.score = p.score;
                o.accepted = p.score >= cm.thresholds.tau[p.class_index];
                o.true_class = home.labels[day_it->second[i]];
                outcomes.push_back(o);
            }

            double accuracy;
            try {
                accuracy = macro_accuracy(outcomes);
            } catch (const NoAccepted&) {
                continue;  // day carries no accepted labeled prediction
            }
            const EpochResult epoch =
                make_epoch_result(home.home_id, row.epoch_day, std::move(outcomes));
            if (epoch.true_set.empty()) continue;
            const SetF1 f1 = set_f1(epoch.predicted_set, epoch.true_set);

            report.daily.push_back({home.home_id, row.epoch_day, row.model_id, accuracy,
                                    f1.precision, f1.recall, f1.f1});
            acc_sum += accuracy;
            f1_sum += f1.f1;
            ++n_days;
        }
        if (n_days > 0) {
            report.home_accuracy.emplace_back(home.home_id,
                                              acc_sum / static_cast<double>(n_days));
            report.home_f1.emplace_back(home.home_id, f1_sum / static_cast<double>(n_days));
        }
    }

    if (!report.home_accuracy.empty()) {
        double acc = 0.0;
        double f1 = 0.0;
        for (const auto& [id, v] : report.home_accuracy) acc += v;
        for (const auto& [id, v] : report.home_f1) f1 += v;
        report.aggregate_accuracy = acc / static_cast<double>(report.home_accuracy.size());
        report.aggregate_f1 = f1 / static_cast<double>(report.home_f1.size());
    }
    return report;
}

std::map<int, double> daily_series(const PolicyReport& report, const std::string& home) {
    std::map<int, double> out;
    for (const auto& d : report.daily)
        if (d.home_id == home) out[d.epoch_day] = d.accuracy;
    return out;
}

}  // namespace

std::vector<RunReport> run_experiment(const Dataset& data,
                                      const ExperimentConfig& config) {
    if (data.homes.empty()) throw ConfigError("dataset has no homes");
    if (config.n_seen < 1) throw ConfigError("n_seen must be >= 1");
    if (config.n_runs < 1) throw ConfigError("n_runs must be >= 1");
    if (static_cast<size_t>(config.n_seen) >= data.homes.size())
        throw ConfigError("need more homes than n_seen");
    if (!data.any_labels()) throw LabelsUnavailable("experiment data has no labels");
    int min_day = data.homes.front().min_day;
    int max_day = data.homes.front().max_day;
    for (const auto& h : data.homes) {
        min_day = std::min(min_day, h.min_day);
        max_day = std::max(max_day, h.max_day);
    }
    if (config.split_day <= min_day || config.split_day > max_day)
        throw ConfigError("split_day leaves no data on one side");

    const auto policies =
        config.policies.empty() ? default_policies(config.window_days) : config.policies;
    const RunContext ctx{data, config, max_day};

    std::vector<RunReport> reports;
    for (int run = 0; run < config.n_runs; ++run) {
        RunReport report;
        report.run_id = run;

        // Seed-derived seen/unseen partition.
        std::vector<size_t> order(data.homes.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        SplitMix64 rng(derive_seed(config.seed, "partition",
                                   static_cast<uint64_t>(run)));
        for (size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniform_below(i + 1)]);

        std::vector<size_t> seen_idx(order.begin(), order.begin() + config.n_seen);
        std::vector<size_t> unseen_idx(order.begin() + config.n_seen, order.end());
        std::sort(seen_idx.begin(), seen_idx.end());
        std::sort(unseen_idx.begin(), unseen_idx.end());
        for (size_t i : seen_idx) report.seen_homes.push_back(data.homes[i].home_id);
        for (size_t i : unseen_idx) report.unseen_homes.push_back(data.homes[i].home_id);

        Dataset seen_view;
        seen_view.class_names = data.class_names;
        for (size_t i : seen_idx) seen_view.homes.push_back(data.homes[i]);
        const auto slices = training_slices(seen_view, config.split_day);
        if (slices.empty()) throw EmptyTrainingSet("no seen home has training rows");

        ForestHyperparams hp = config.hyperparams;
        hp.rng_seed = derive_seed(config.seed, "train", static_cast<uint64_t>(run));
        const ModelRegistry registry = build_registry(slices, data.class_names, hp);

        std::vector<const HomeData*> unseen;
        for (size_t i : unseen_idx) unseen.push_back(&data.homes[i]);
        std::vector<std::unique_ptr<HomePredictionCache>> caches;
        for (const HomeData* h : unseen)
            caches.push_back(std::make_unique<HomePredictionCache>(registry, *h));

        const uint64_t random_seed =
            derive_seed(config.seed, "random-policy", static_cast<uint64_t>(run));
        for (const auto& spec : policies)
            report.policies.push_back(
                evaluate_policy(ctx, spec, registry, caches, unseen, random_seed));

        // Ratios against each policy's ideal, then day accounting against the
        // static twin.
        for (size_t p = 0; p < policies.size(); ++p) {
            auto& pr = report.policies[p];
            if (!policies[p].ideal.empty()) {
                const PolicyReport* ideal = report.find_policy(policies[p].ideal);
                if (ideal && !ideal->home_accuracy.empty() &&
                    !pr.home_accuracy.empty()) {
                    pr.ratio_accuracy =
                        ratio_to_ideal(pr.aggregate_accuracy, ideal->aggregate_accuracy);
                    pr.ratio_f1 = ratio_to_ideal(pr.aggregate_f1, ideal->aggregate_f1);
                    pr.ratio_exceeds_one = *pr.ratio_accuracy > 1.0 || *pr.ratio_f1 > 1.0;
                }
            }
            if (!policies[p].static_twin.empty()) {
                const PolicyReport* twin = report.find_policy(policies[p].static_twin);
                if (twin) {
                    DayComparison total;
                    for (const auto& home : report.unseen_homes)
                        total += compare_days(daily_series(pr, home),
                                              daily_series(*twin, home));
                    pr.dynamic_vs_static = total;
                }
            }
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

void write_run_report_csv(std::ostream& out, const RunReport& report) {
    out << "run_id,policy,scope,home_id,epoch_day,model_id,accuracy,precision,recall,f1,"
           "ratio_accuracy,ratio_f1,wins,losses,ties\n";
    for (const auto& p : report.policies) {
        for (const auto& d : p.daily)
            out << report.run_id << ',' << p.name << ",day," << d.home_id << ','
                << d.epoch_day << ',' << d.model_id << ',' << format_double(d.accuracy)
                << ',' << format_double(d.precision) << ',' << format_double(d.recall)
                << ',' << format_double(d.f1) << ",,,,,\n";
        for (size_t i = 0; i < p.home_accuracy.size(); ++i)
            out << report.run_id << ',' << p.name << ",home," << p.home_accuracy[i].first
                << ",,," << format_double(p.home_accuracy[i].second) << ",,,"
                << format_double(p.home_f1[i].second) << ",,,,,\n";
        out << report.run_id << ',' << p.name << ",run,,,,"
            << format_double(p.aggregate_accuracy) << ",,,"
            << format_double(p.aggregate_f1) << ','
            << (p.ratio_accuracy ? format_double(*p.ratio_accuracy) : std::string())
            << ','
            << (p.ratio_f1 ? format_double(*p.ratio_f1) : std::string()) << ',';
        if (p.dynamic_vs_static)
            out << p.dynamic_vs_static->wins << ',' << p.dynamic_vs_static->losses << ','
                << p.dynamic_vs_static->ties;
        else
            out << ",,";
        out << '\n';
    }
}

void write_summary(std::ostream& out, const std::vector<RunReport>& reports,
                   const std::string& fingerprint) {
    out << "# flowsel experiment summary\n";
    out << "# fingerprint=" << fingerprint << "\n";
    out << "# es_small_sample_correction=on\n\n";

    auto aggregate_of = [&](const RunReport& r, const std::string& name,
                            double fallback) {
        const PolicyReport* p = r.find_policy(name);
        return p && !p->home_accuracy.empty() ? p->aggregate_accuracy : fallback;
    };

    out << "## Average accuracy per run\n";
    out << "run  global  best(ctx)  best(ctx+g)  best(ctx+g)-dyn\n";
    double sums[4] = {0, 0, 0, 0};
    for (const auto& r : reports) {
        const double v[4] = {aggregate_of(r, "global", 0.0),
                             aggregate_of(r, "oracle-ctx-static", 0.0),
                             aggregate_of(r, "oracle-static", 0.0),
                             aggregate_of(r, "oracle-dynamic", 0.0)};
        out << r.run_id + 1 << "    " << fixed3(v[0]) << "   " << fixed3(v[1])
            << "      " << fixed3(v[2]) << "        " << fixed3(v[3]) << '\n';
        for (int i = 0; i < 4; ++i) sums[i] += v[i];
    }
    const double n_runs = static_cast<double>(reports.size());
    out << "avg  " << fixed3(sums[0] / n_runs) << "   " << fixed3(sums[1] / n_runs)
        << "      " << fixed3(sums[2] / n_runs) << "        "
        << fixed3(sums[3] / n_runs) << "\n\n";

    out << "## Dynamic vs static oracle selection, day counts per run\n";
    out << "run  d>s  d<s  d=s\n";
    for (const auto& r : reports) {
        const PolicyReport* p = r.find_policy("oracle-dynamic");
        if (!p || !p->dynamic_vs_static) continue;
        out << r.run_id + 1 << "    " << p->dynamic_vs_static->wins << "    "
            << p->dynamic_vs_static->losses << "    " << p->dynamic_vs_static->ties
            << '\n';
    }
    out << '\n';

    for (const char* regime : {"dynamic", "static"}) {
        out << "## Accuracy ratio to the ideal model, " << regime << " selection\n";
        out << "metric";
        for (const auto& r : reports) out << "  run" << r.run_id + 1;
        out << "  avg\n";
        for (const std::string metric : {"ks", "kr", "es", "js", "rnd"}) {
            const std::string name = metric + "-" + regime;
            out << metric;
            double sum = 0.0;
            size_t count = 0;
            for (const auto& r : reports) {
                const PolicyReport* p = r.find_policy(name);
                if (p && p->ratio_accuracy) {
                    out << "  " << fixed3(*p->ratio_accuracy)
                        << (*p->ratio_accuracy > 1.0 ? "*" : "");
                    sum += *p->ratio_accuracy;
                    ++count;
                } else {
                    out << "  -";
                }
            }
            out << "  " << (count ? fixed3(sum / static_cast<double>(count)) : "-")
                << '\n';
        }
        out << '\n';
    }
    out << "* ratio above 1: static selection can beat its training-period ideal on "
           "test days\n";
}

}  // namespace flowsel
