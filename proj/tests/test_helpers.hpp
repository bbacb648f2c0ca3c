#pragma once

// Shared fixtures for the unit tests: tiny Gaussian-blob datasets and
// quick-to-train registries.

#include <string>
#include <vector>

#include "flowsel/dataset.hpp"
#include "flowsel/flow.hpp"
#include "flowsel/forest.hpp"
#include "flowsel/registry.hpp"
#include "flowsel/rng.hpp"

namespace flowsel::test {

// K Gaussian blobs in feature space, `per_class` rows each, centers spaced
// `spacing` apart along every activity dimension.
struct Blobs {
    std::vector<FeatureVector> feats;
    std::vector<uint16_t> labels;
};

inline Blobs make_blobs(size_t n_classes, size_t per_class, double spacing,
                        double sigma, uint64_t seed) {
    SplitMix64 rng(seed);
    Blobs b;
    for (size_t c = 0; c < n_classes; ++c) {
        for (size_t i = 0; i < per_class; ++i) {
            FeatureVector f;
            for (size_t d = 0; d < 22; ++d)
                f.values[d] = static_cast<double>(c + 1) * spacing + rng.normal() * sigma;
            f.values[22 + c % 6] = 1.0;
            b.feats.push_back(f);
            b.labels.push_back(static_cast<uint16_t>(c));
        }
    }
    return b;
}

inline std::vector<std::string> class_names(size_t k) {
    std::vector<std::string> names;
    for (size_t c = 0; c < k; ++c) names.push_back("dev" + std::to_string(c));
    return names;
}

inline ForestHyperparams small_forest(uint64_t seed, uint32_t trees = 15) {
    ForestHyperparams hp;
    hp.n_trees = trees;
    hp.max_depth = 12;
    hp.max_features_per_split = 5;
    hp.rng_seed = seed;
    return hp;
}

// A single-node "always class c" stump.
inline DecisionTree constant_tree(uint16_t cls) {
    DecisionTree t;
    TreeNode leaf;
    leaf.feature = -1;
    leaf.voted_class = cls;
    leaf.hist_begin = 0;
    leaf.hist_count = 1;
    t.nodes.push_back(leaf);
    t.histogram.push_back({cls, 1});
    return t;
}

// A stump: feature 0 <= threshold votes `lo`, else `hi`.
inline DecisionTree stump(double threshold, uint16_t lo, uint16_t hi) {
    DecisionTree t;
    TreeNode root;
    root.feature = 0;
    root.threshold = threshold;
    root.left = 1;
    root.right = 2;
    t.nodes.push_back(root);
    TreeNode l;
    l.feature = -1;
    l.voted_class = lo;
    l.hist_begin = 0;
    l.hist_count = 1;
    t.nodes.push_back(l);
    TreeNode r;
    r.feature = -1;
    r.voted_class = hi;
    r.hist_begin = 1;
    r.hist_count = 1;
    t.nodes.push_back(r);
    t.histogram.push_back({lo, 1});
    t.histogram.push_back({hi, 1});
    return t;
}

inline FeatureVector feature_at(double x) {
    FeatureVector f;
    f.values[0] = x;
    return f;
}

}  // namespace flowsel::test
