#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "flowsel/errors.hpp"
#include "flowsel/forest.hpp"
#include "flowsel/rng.hpp"
#include "test_helpers.hpp"

using namespace flowsel;
using namespace flowsel::test;

TEST_CASE("single-class training degenerates to a constant predictor") {
    const Blobs b = make_blobs(1, 30, 10.0, 1.0, 5);
    const Forest f = train_forest(b.feats, b.labels, class_names(1), small_forest(1));
    for (const auto& fv : b.feats) {
        const auto p = f.predict(fv);
        CHECK(p.class_index == 0);
        CHECK(p.score == 1.0);
    }
}

TEST_CASE("same seed, same data: byte-identical forests") {
    const Blobs b = make_blobs(3, 60, 8.0, 1.5, 7);
    const auto hp = small_forest(42, 20);
    const Forest f1 = train_forest(b.feats, b.labels, class_names(3), hp);
    const Forest f2 = train_forest(b.feats, b.labels, class_names(3), hp);
    const ClassThresholds t1 = fit_thresholds(f1, b.feats, b.labels);
    const ClassThresholds t2 = fit_thresholds(f2, b.feats, b.labels);
    CHECK(serialize_model(f1, t1) == serialize_model(f2, t2));

    auto hp2 = hp;
    hp2.rng_seed = 43;
    const Forest f3 = train_forest(b.feats, b.labels, class_names(3), hp2);
    CHECK(serialize_model(f1, t1) != serialize_model(f3, fit_thresholds(f3, b.feats, b.labels)));
}

TEST_CASE("three well-separated Gaussian classes reach 0.99 held-out accuracy") {
    const Blobs train = make_blobs(3, 500, 25.0, 2.0, 11);
    const Blobs test = make_blobs(3, 150, 25.0, 2.0, 12);
    ForestHyperparams hp;  // library defaults: 100 trees, 5 features, depth 20
    hp.rng_seed = 1;
    const Forest f = train_forest(train.feats, train.labels, class_names(3), hp);
    std::array<int, 3> correct{};
    std::array<int, 3> total{};
    for (size_t i = 0; i < test.feats.size(); ++i) {
        ++total[test.labels[i]];
        if (f.predict(test.feats[i]).class_index == test.labels[i])
            ++correct[test.labels[i]];
    }
    double macro = 0;
    for (int c = 0; c < 3; ++c)
        macro += static_cast<double>(correct[c]) / total[c];
    macro /= 3;
    CHECK(macro >= 0.99);
}

TEST_CASE("prediction is the vote fraction") {
    // 7 of 10 trees vote class 0 regardless of input.
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 7; ++i) trees.push_back(constant_tree(0));
    for (int i = 0; i < 3; ++i) trees.push_back(constant_tree(1));
    const Forest f(class_names(2), small_forest(1, 10), std::move(trees));
    const auto p = f.predict(feature_at(0.0));
    CHECK(p.class_index == 0);
    CHECK(p.score == doctest::Approx(0.7));

    // Unanimous forest scores 1.0.
    std::vector<DecisionTree> unanimous;
    for (int i = 0; i < 10; ++i) unanimous.push_back(constant_tree(1));
    const Forest g(class_names(2), small_forest(1, 10), std::move(unanimous));
    CHECK(g.predict(feature_at(0.0)).score == 1.0);
}

TEST_CASE("vote ties go to the lower class index") {
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 5; ++i) trees.push_back(constant_tree(2));
    for (int i = 0; i < 5; ++i) trees.push_back(constant_tree(1));
    const Forest f(class_names(3), small_forest(1, 10), std::move(trees));
    const auto p = f.predict(feature_at(0.0));
    CHECK(p.class_index == 1);
    CHECK(p.score == doctest::Approx(0.5));
}

TEST_CASE("vote counts always sum to the number of trees") {
    const Blobs b = make_blobs(4, 40, 6.0, 2.5, 21);
    const Forest f = train_forest(b.feats, b.labels, class_names(4), small_forest(3, 17));
    SplitMix64 rng(77);
    for (int i = 0; i < 100; ++i) {
        FeatureVector fv;
        for (auto& v : fv.values) v = rng.uniform01() * 30.0;
        const auto votes = f.vote_counts(fv);
        uint32_t sum = 0;
        for (uint32_t v : votes) sum += v;
        CHECK(sum == 17);
    }
}

TEST_CASE("fit_thresholds averages correct scores per class with fallback") {
    // Rows: two class-0 rows at f0 = 0 and f0 = 1, one class-1 row at f0 = 0.
    // Trees: 6 constant class-0, 2 stumps (f0 <= 0.5 -> class 1), 2 constant
    // class-1. Votes for class 0: row0 6/10, row1 8/10, row2 6/10.
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 6; ++i) trees.push_back(constant_tree(0));
    for (int i = 0; i < 2; ++i) trees.push_back(stump(0.5, 1, 0));
    for (int i = 0; i < 2; ++i) trees.push_back(constant_tree(1));
    const Forest f(class_names(2), small_forest(1, 10), std::move(trees));

    const std::vector<FeatureVector> feats = {feature_at(0.0), feature_at(1.0),
                                              feature_at(0.0)};
    const std::vector<uint16_t> labels = {0, 0, 1};
    CHECK(f.predict(feats[0]).score == doctest::Approx(0.6));
    CHECK(f.predict(feats[1]).score == doctest::Approx(0.8));

    const ClassThresholds th = fit_thresholds(f, feats, labels);
    CHECK(th.tau[0] == doctest::Approx(0.7));  // mean of 0.6 and 0.8
    // Class 1 is never predicted correctly: falls back to the mean of the
    // defined thresholds.
    CHECK(th.tau[1] == doctest::Approx(0.7));
}

TEST_CASE("threshold fallback with no correct prediction at all is 0.5") {
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 4; ++i) trees.push_back(constant_tree(0));
    const Forest f(class_names(2), small_forest(1, 4), std::move(trees));
    const std::vector<FeatureVector> feats = {feature_at(0.0)};
    const std::vector<uint16_t> labels = {1};  // always mispredicted
    const ClassThresholds th = fit_thresholds(f, feats, labels);
    CHECK(th.tau[0] == 0.5);
    CHECK(th.tau[1] == 0.5);
}

TEST_CASE("perfectly fit training data gives tau 1 everywhere") {
    const Blobs b = make_blobs(2, 50, 40.0, 0.5, 31);
    const Forest f = train_forest(b.feats, b.labels, class_names(2), small_forest(9, 25));
    const ClassThresholds th = fit_thresholds(f, b.feats, b.labels);
    for (double t : th.tau) CHECK(t == doctest::Approx(1.0));
}

TEST_CASE("acceptance boundary is inclusive") {
    std::vector<DecisionTree> trees;
    for (int i = 0; i < 7; ++i) trees.push_back(constant_tree(0));
    for (int i = 0; i < 3; ++i) trees.push_back(constant_tree(1));
    const Forest f(class_names(2), small_forest(1, 10), std::move(trees));

    ClassThresholds th;
    th.tau = {0.7, 0.5};
    CHECK(predict_accepted(f, th, feature_at(0)).has_value());  // score == tau
    th.tau = {0.69, 0.5};
    CHECK(predict_accepted(f, th, feature_at(0)).has_value());
    th.tau = {0.701, 0.5};
    CHECK(!predict_accepted(f, th, feature_at(0)).has_value());  // 0.7 < 0.701
}

TEST_CASE("accept/discard partition matches the score-threshold definition") {
    const Blobs b = make_blobs(3, 80, 5.0, 2.0, 61);
    const Forest f = train_forest(b.feats, b.labels, class_names(3), small_forest(2, 21));
    const ClassThresholds th = fit_thresholds(f, b.feats, b.labels);
    for (const auto& fv : b.feats) {
        const auto p = f.predict(fv);
        const auto accepted = predict_accepted(f, th, fv);
        CHECK(accepted.has_value() == (p.score >= th.tau[p.class_index]));
        if (accepted) {
            CHECK(accepted->class_index == p.class_index);
            CHECK(accepted->score == p.score);
        }
    }
}

TEST_CASE("a deep single tree fits its bootstrap sample exactly") {
    // Duplicate-free, consistently labeled data: y = class of the interval
    // f0 falls in. The bootstrap sample is recovered by replaying the tree's
    // RNG stream, which draws the bootstrap rows first.
    std::vector<FeatureVector> feats;
    std::vector<uint16_t> labels;
    SplitMix64 gen(91);
    for (int i = 0; i < 120; ++i) {
        const double x = gen.uniform01() * 6.0;
        feats.push_back(feature_at(x));
        labels.push_back(static_cast<uint16_t>(std::min(5, static_cast<int>(x))));
    }
    ForestHyperparams hp;
    hp.n_trees = 1;
    hp.max_depth = 40;
    hp.max_features_per_split = kFeatureCount;
    hp.rng_seed = 17;
    const Forest f = train_forest(feats, labels, class_names(6), hp);

    SplitMix64 replay(derive_seed(hp.rng_seed, "tree", 0));
    std::set<uint32_t> in_bag;
    for (size_t i = 0; i < feats.size(); ++i)
        in_bag.insert(static_cast<uint32_t>(replay.uniform_below(feats.size())));
    REQUIRE(!in_bag.empty());
    for (uint32_t row : in_bag)
        CHECK(f.predict(feats[row]).class_index == labels[row]);
}

TEST_CASE("a deep forest reproduces training labels on separated data") {
    const Blobs b = make_blobs(4, 60, 30.0, 1.0, 13);
    ForestHyperparams hp;
    hp.n_trees = 60;
    hp.max_depth = 30;
    hp.max_features_per_split = 8;
    hp.rng_seed = 3;
    const Forest f = train_forest(b.feats, b.labels, class_names(4), hp);
    for (size_t i = 0; i < b.feats.size(); ++i)
        CHECK(f.predict(b.feats[i]).class_index == b.labels[i]);
}

TEST_CASE("model serialization round-trips bit-exactly") {
    const Blobs b = make_blobs(3, 40, 9.0, 2.0, 23);
    const Forest f = train_forest(b.feats, b.labels, class_names(3), small_forest(5, 12));
    const ClassThresholds th = fit_thresholds(f, b.feats, b.labels);
    const std::string bytes = serialize_model(f, th);
    const auto [f2, th2] = deserialize_model(bytes);
    CHECK(serialize_model(f2, th2) == bytes);
    CHECK(f2.class_names() == f.class_names());
    CHECK(f2.hyperparams() == f.hyperparams());
    // Loaded forest predicts identically.
    for (const auto& fv : b.feats) {
        const auto p1 = f.predict(fv);
        const auto p2 = f2.predict(fv);
        CHECK(p1.class_index == p2.class_index);
        CHECK(p1.score == p2.score);
    }
}

TEST_CASE("training rejects bad input") {
    CHECK_THROWS_AS(train_forest({}, {}, class_names(1), small_forest(1)),
                    EmptyTrainingSet);
    const Blobs b = make_blobs(2, 5, 5.0, 1.0, 3);
    auto hp = small_forest(1);
    hp.max_features_per_split = 99;
    CHECK_THROWS_AS(train_forest(b.feats, b.labels, class_names(2), hp), ConfigError);
    hp = small_forest(1);
    hp.n_trees = 0;
    CHECK_THROWS_AS(train_forest(b.feats, b.labels, class_names(2), hp), ConfigError);
}
