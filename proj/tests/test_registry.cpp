#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "flowsel/errors.hpp"
#include "flowsel/registry.hpp"
#include "test_helpers.hpp"

using namespace flowsel;
using namespace flowsel::test;

namespace {

HomeTrainingData home_slice(const std::string& id, const Blobs& b) {
    return {id, b.feats, b.labels};
}

}  // namespace

TEST_CASE("five homes give five contextualized entries plus GLOBAL") {
    std::vector<HomeTrainingData> homes;
    for (int h = 0; h < 5; ++h)
        homes.push_back(home_slice("home0" + std::to_string(h),
                                   make_blobs(2, 25, 12.0, 2.0, 100 + h)));
    const ModelRegistry reg = build_registry(homes, class_names(2), small_forest(1));
    REQUIRE(reg.size() == 6);
    for (int h = 0; h < 5; ++h)
        CHECK(reg.at(h).model_id == "home0" + std::to_string(h));
    CHECK(reg.at(5).model_id == kGlobalModelId);
    CHECK(reg.global_index() == 5);
}

TEST_CASE("identical data and seed produce identical forests across homes") {
    const Blobs b = make_blobs(2, 30, 10.0, 2.0, 9);
    const std::vector<HomeTrainingData> homes = {home_slice("a", b), home_slice("b", b)};
    const ModelRegistry reg = build_registry(homes, class_names(2), small_forest(4));
    CHECK(serialize_model(reg.at(0).forest, reg.at(0).thresholds) ==
          serialize_model(reg.at(1).forest, reg.at(1).thresholds));
    CHECK(reg.at(0).train_score_dist.samples() == reg.at(1).train_score_dist.samples());
}

TEST_CASE("single-home registry: GLOBAL is structurally equal to the home model") {
    const Blobs b = make_blobs(3, 20, 10.0, 2.0, 29);
    const ModelRegistry reg =
        build_registry({home_slice("only", b)}, class_names(3), small_forest(6));
    REQUIRE(reg.size() == 2);
    CHECK(serialize_model(reg.at(0).forest, reg.at(0).thresholds) ==
          serialize_model(reg.at(1).forest, reg.at(1).thresholds));
}

TEST_CASE("disjoint class homes: GLOBAL covers both, context models only their own") {
    // home a holds only class 0, home b only class 1, far apart.
    Blobs a = make_blobs(1, 40, 10.0, 1.0, 41);
    Blobs b;
    {
        Blobs raw = make_blobs(1, 40, 10.0, 1.0, 43);
        for (auto& f : raw.feats) {
            for (size_t d = 0; d < 22; ++d) f.values[d] += 30.0;
            b.feats.push_back(f);
        }
        b.labels.assign(40, 1);
    }
    const ModelRegistry reg = build_registry(
        {home_slice("a", a), home_slice("b", b)}, class_names(2), small_forest(8, 25));

    std::set<uint16_t> global_predictions;
    std::set<uint16_t> a_predictions;
    std::set<uint16_t> b_predictions;
    for (const auto& rows : {a.feats, b.feats})
        for (const auto& f : rows) {
            global_predictions.insert(
                reg.at(reg.global_index()).forest.predict(f).class_index);
            a_predictions.insert(reg.at(0).forest.predict(f).class_index);
            b_predictions.insert(reg.at(1).forest.predict(f).class_index);
        }
    CHECK(global_predictions == std::set<uint16_t>{0, 1});
    CHECK(a_predictions == std::set<uint16_t>{0});
    CHECK(b_predictions == std::set<uint16_t>{1});
}

TEST_CASE("score distribution pools exactly one held-out score per row") {
    for (size_t n : {7u, 10u, 35u}) {
        Blobs b = make_blobs(1, n, 5.0, 1.0, 51);
        b.labels.assign(n, 0);
        const auto d = build_score_distribution(home_slice("x", b), class_names(1),
                                                small_forest(3, 8));
        CHECK(d.size() == n);  // 7 rows degrade to leave-one-out folds
    }
}

TEST_CASE("separable training data concentrates scores near 1") {
    const Blobs b = make_blobs(3, 40, 35.0, 0.8, 53);
    const auto d =
        build_score_distribution(home_slice("x", b), class_names(3), small_forest(5, 20));
    CHECK(d.cdf(0.99) <= 0.2);  // most held-out scores are (almost) unanimous
    CHECK(d.cdf(1.0) == 1.0);
}

TEST_CASE("eCDF is a proper distribution function") {
    const ScoreDistribution d(std::vector<double>{0.4, 0.2, 0.9, 0.2});
    CHECK(d.cdf(0.1) == 0.0);
    CHECK(d.cdf(0.2) == doctest::Approx(0.5));
    CHECK(d.cdf(0.4) == doctest::Approx(0.75));
    CHECK(d.cdf(1.0) == 1.0);
    double prev = -1.0;
    for (double x = 0.0; x <= 1.0; x += 0.01) {
        CHECK(d.cdf(x) >= prev);
        prev = d.cdf(x);
    }
    const auto& s = d.samples();
    CHECK(std::is_sorted(s.begin(), s.end()));
}

TEST_CASE("registry save/load round-trips models, order, and score samples") {
    std::vector<HomeTrainingData> homes;
    for (int h = 0; h < 3; ++h)
        homes.push_back(home_slice("h" + std::to_string(h),
                                   make_blobs(2, 18, 14.0, 2.0, 60 + h)));
    const ModelRegistry reg = build_registry(homes, class_names(2), small_forest(2, 10));

    const auto dir = std::filesystem::temp_directory_path() / "flowsel_registry_test";
    std::filesystem::remove_all(dir);
    save_registry(reg, dir.string(), "cafe0123");
    const ModelRegistry loaded = load_registry(dir.string());

    REQUIRE(loaded.size() == reg.size());
    for (size_t i = 0; i < reg.size(); ++i) {
        CHECK(loaded.at(i).model_id == reg.at(i).model_id);
        CHECK(serialize_model(loaded.at(i).forest, loaded.at(i).thresholds) ==
              serialize_model(reg.at(i).forest, reg.at(i).thresholds));
        CHECK(loaded.at(i).train_score_dist.samples() ==
              reg.at(i).train_score_dist.samples());
    }
}

TEST_CASE("empty training data is rejected per home") {
    CHECK_THROWS_AS(train_contextualized({}, class_names(1), small_forest(1)),
                    EmptyTrainingSet);
    HomeTrainingData empty;
    empty.home_id = "empty";
    CHECK_THROWS_AS(train_context_model("empty", empty, class_names(1), small_forest(1)),
                    EmptyTrainingSet);
}

TEST_CASE("home id GLOBAL is reserved") {
    const Blobs b = make_blobs(1, 12, 5.0, 1.0, 71);
    CHECK_THROWS_AS(
        build_registry({home_slice("GLOBAL", b)}, class_names(1), small_forest(1)),
        ConfigError);
}
