#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "flowsel/dataset.hpp"
#include "flowsel/errors.hpp"
#include "flowsel/experiment.hpp"
#include "flowsel/metrics.hpp"
#include "flowsel/synthgen.hpp"
#include "test_helpers.hpp"

using namespace flowsel;

namespace {

Outcome outcome(bool accepted, uint16_t predicted, int32_t truth) {
    return {accepted, predicted, truth, 0.9};
}

std::string synth_dir(const DriftSpec& spec, const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("flowsel_eval_" + name);
    std::filesystem::remove_all(dir);
    generate_dataset(spec, dir.string());
    return dir.string();
}

}  // namespace

TEST_CASE("macro accuracy averages per-class rates, not per-flow rates") {
    std::vector<Outcome> outcomes;
    // class 0: 4 of 4 correct; class 1: 1 of 2 correct -> (1.0 + 0.5)/2.
    for (int i = 0; i < 4; ++i) outcomes.push_back(outcome(true, 0, 0));
    outcomes.push_back(outcome(true, 1, 1));
    outcomes.push_back(outcome(true, 0, 1));
    CHECK(macro_accuracy(outcomes) == doctest::Approx(0.75));

    // Class sizes do not change the macro value.
    for (int i = 0; i < 20; ++i) outcomes.push_back(outcome(true, 0, 0));
    CHECK(macro_accuracy(outcomes) == doctest::Approx(0.75));
}

TEST_CASE("macro accuracy edge cases") {
    std::vector<Outcome> all_correct = {outcome(true, 2, 2), outcome(true, 1, 1)};
    CHECK(macro_accuracy(all_correct) == 1.0);

    std::vector<Outcome> all_wrong = {outcome(true, 0, 1), outcome(true, 1, 0)};
    CHECK(macro_accuracy(all_wrong) == 0.0);

    std::vector<Outcome> discarded = {outcome(false, 0, 0)};
    CHECK_THROWS_AS(macro_accuracy(discarded), NoAccepted);

    std::vector<Outcome> unlabeled = {outcome(true, 0, -1)};
    CHECK_THROWS_AS(macro_accuracy(unlabeled), NoAccepted);

    // Discarded and unlabeled flows are excluded from the per-class rates.
    std::vector<Outcome> mixed = {outcome(true, 0, 0), outcome(false, 1, 0),
                                  outcome(true, 5, -1)};
    CHECK(macro_accuracy(mixed) == 1.0);
}

TEST_CASE("set F1 on hand cases") {
    const std::set<int32_t> t{0, 1, 3};
    const SetF1 perfect = set_f1({0, 1, 3}, t);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const SetF1 partial = set_f1({0, 1, 2}, t);  // {A,B,C} vs {A,B,D}
    CHECK(partial.precision == doctest::Approx(2.0 / 3));
    CHECK(partial.recall == doctest::Approx(2.0 / 3));
    CHECK(partial.f1 == doctest::Approx(2.0 / 3));

    const SetF1 disjoint = set_f1({5, 6}, t);
    CHECK(disjoint.precision == 0.0);
    CHECK(disjoint.recall == 0.0);
    CHECK(disjoint.f1 == 0.0);

    const SetF1 empty = set_f1({}, t);  // vacuous precision, recall drives F1
    CHECK(empty.precision == 1.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);

    CHECK_THROWS_AS(set_f1({0}, {}), std::invalid_argument);
}

TEST_CASE("swapping predicted and true sets swaps precision and recall") {
    SplitMix64 rng(15);
    for (int i = 0; i < 50; ++i) {
        std::set<int32_t> p;
        std::set<int32_t> t;
        for (int c = 0; c < 8; ++c) {
            if (rng.uniform01() < 0.4) p.insert(c);
            if (rng.uniform01() < 0.4) t.insert(c);
        }
        if (p.empty() || t.empty()) continue;
        const SetF1 ab = set_f1(p, t);
        const SetF1 ba = set_f1(t, p);
        CHECK(ab.precision == doctest::Approx(ba.recall));
        CHECK(ab.recall == doctest::Approx(ba.precision));
        CHECK(ab.f1 == doctest::Approx(ba.f1));
    }
}

TEST_CASE("ratio to ideal") {
    CHECK(ratio_to_ideal(0.9, 0.9) == 1.0);
    CHECK(ratio_to_ideal(0.8, 0.9) == doctest::Approx(0.8889).epsilon(1e-3));
    CHECK(ratio_to_ideal(0.95, 0.9) > 1.0);  // possible under static selection
    CHECK_THROWS_AS(ratio_to_ideal(0.5, 0.0), DivisionByZero);
}

TEST_CASE("compare_days counts wins, losses and ties over shared days") {
    std::map<int, double> stat;
    std::map<int, double> dyn;
    for (int d = 0; d < 5; ++d) {
        stat[d] = 0.8;
        dyn[d] = d < 3 ? 0.81 : 0.8;
    }
    const DayComparison c = compare_days(dyn, stat);
    CHECK(c.wins == 3);
    CHECK(c.losses == 0);
    CHECK(c.ties == 2);

    const DayComparison same = compare_days(stat, stat);
    CHECK(same.wins == 0);
    CHECK(same.losses == 0);
    CHECK(same.ties == 5);

    std::map<int, double> other{{99, 0.5}};
    const DayComparison none = compare_days(dyn, other);
    CHECK(none.wins + none.losses + none.ties == 0);

    // Near-equal values within 1e-12 count as ties.
    std::map<int, double> a{{0, 0.5}};
    std::map<int, double> b{{0, 0.5 + 1e-13}};
    CHECK(compare_days(a, b).ties == 1);
}

TEST_CASE("epoch result derives predicted and true device sets") {
    std::vector<Outcome> outcomes = {outcome(true, 0, 0), outcome(false, 1, 1),
                                     outcome(true, 2, 1)};
    const EpochResult e = make_epoch_result("home00", 31, std::move(outcomes));
    CHECK(e.predicted_set == std::set<int32_t>{0, 2});
    CHECK(e.true_set == std::set<int32_t>{0, 1});
}

TEST_CASE("experiment protocol: partitions, determinism, aggregates, ratios") {
    DriftSpec spec;
    spec.n_homes = 6;
    spec.n_classes = 3;
    spec.days = 9;
    spec.flows_per_class_per_day = 5;
    spec.n_contexts = 2;
    spec.context_offset_scale = 1.0;
    spec.noise_sigma = 0.05;
    spec.seed = 2025;
    const std::string dir = synth_dir(spec, "protocol");
    const Dataset data = load_dataset(dir);
    REQUIRE(data.homes.size() == 6);

    ExperimentConfig config;
    config.n_seen = 3;
    config.n_runs = 2;
    config.split_day = 6;
    config.window_days = 3;
    config.seed = 7;
    config.hyperparams = test::small_forest(7, 10);

    const auto reports = run_experiment(data, config);
    REQUIRE(reports.size() == 2);
    for (const auto& report : reports) {
        CHECK(report.seen_homes.size() == 3);
        CHECK(report.unseen_homes.size() == 3);

        // Aggregate equals the mean of the per-home entries.
        for (const auto& policy : report.policies) {
            if (policy.home_accuracy.empty()) continue;
            double mean = 0.0;
            for (const auto& [home, acc] : policy.home_accuracy) mean += acc;
            mean /= static_cast<double>(policy.home_accuracy.size());
            CHECK(std::fabs(policy.aggregate_accuracy - mean) <= 1e-12);
        }

        // The dynamic oracle is its own ideal.
        const PolicyReport* oracle_dyn = report.find_policy("oracle-dynamic");
        REQUIRE(oracle_dyn != nullptr);
        REQUIRE(oracle_dyn->ratio_accuracy.has_value());
        CHECK(*oracle_dyn->ratio_accuracy == 1.0);

        // Day accounting exists for each dynamic policy.
        REQUIRE(oracle_dyn->dynamic_vs_static.has_value());
    }

    // Same seed, same reports, byte for byte.
    const auto reports2 = run_experiment(data, config);
    for (size_t r = 0; r < reports.size(); ++r) {
        std::ostringstream a;
        std::ostringstream b;
        write_run_report_csv(a, reports[r]);
        write_run_report_csv(b, reports2[r]);
        CHECK(a.str() == b.str());
    }

    std::ostringstream summary;
    write_summary(summary, reports, "feedc0de");
    CHECK(summary.str().find("feedc0de") != std::string::npos);
    CHECK(summary.str().find("## Accuracy ratio") != std::string::npos);
}

TEST_CASE("twelve homes with five seen leave seven unseen") {
    DriftSpec spec;
    spec.n_homes = 12;
    spec.n_classes = 2;
    spec.days = 4;
    spec.flows_per_class_per_day = 3;
    spec.seed = 31;
    const std::string dir = synth_dir(spec, "partition12");
    const Dataset data = load_dataset(dir);

    ExperimentConfig config;
    config.n_seen = 5;
    config.n_runs = 1;
    config.split_day = 2;
    config.window_days = 2;
    config.seed = 3;
    config.hyperparams = test::small_forest(3, 6);

    const auto reports = run_experiment(data, config);
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].seen_homes.size() == 5);
    CHECK(reports[0].unseen_homes.size() == 7);
}

TEST_CASE("impossible partitions are configuration errors") {
    DriftSpec spec;
    spec.n_homes = 3;
    spec.n_classes = 2;
    spec.days = 4;
    spec.flows_per_class_per_day = 3;
    spec.seed = 33;
    const std::string dir = synth_dir(spec, "bad_config");
    const Dataset data = load_dataset(dir);

    ExperimentConfig config;
    config.hyperparams = test::small_forest(1, 5);
    config.n_seen = 3;  // nothing left unseen
    config.n_runs = 1;
    config.split_day = 2;
    CHECK_THROWS_AS(run_experiment(data, config), ConfigError);

    config.n_seen = 1;
    config.split_day = 99;  // no test days
    CHECK_THROWS_AS(run_experiment(data, config), ConfigError);

    config.split_day = 0;  // no training days
    CHECK_THROWS_AS(run_experiment(data, config), ConfigError);
}
