#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowsel/flow.hpp"

namespace flowsel {

struct ForestHyperparams {
    uint32_t n_trees = 100;
    uint32_t max_features_per_split = 5;
    uint32_t max_depth = 20;
    uint64_t rng_seed = 1;

    bool operator==(const ForestHyperparams&) const = default;
};

// Array-encoded tree node. Internal nodes route value <= threshold to the
// left child; leaves carry a slice of the per-tree histogram pool plus the
// precomputed plurality class.
struct TreeNode {
    int16_t feature = -1;  // -1 marks a leaf
    uint16_t voted_class = 0;
    double threshold = 0.0;
    uint32_t left = 0;
    uint32_t right = 0;
    uint32_t hist_begin = 0;
    uint32_t hist_count = 0;
};

struct LeafCount {
    uint16_t class_index = 0;
    uint32_t count = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;       // nodes[0] is the root
    std::vector<LeafCount> histogram;  // leaf class counts, ascending class index

    uint16_t vote(const FeatureVector& f) const;
};

struct ScoredPrediction {
    uint16_t class_index = 0;
    double score = 0.0;  // fraction of trees voting the winning class, in (0,1]
};

// Per-class minimum score for accepting a prediction.
struct ClassThresholds {
    std::vector<double> tau;
};

class Forest {
public:
    Forest() = default;
    Forest(std::vector<std::string> class_names, ForestHyperparams hp,
           std::vector<DecisionTree> trees);

    const std::vector<std::string>& class_names() const { return class_names_; }
    const ForestHyperparams& hyperparams() const { return hyperparams_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    // Plurality vote across trees; ties break toward the lowest class index.
    ScoredPrediction predict(const FeatureVector& f) const;

    // Per-class vote counts for one input; sums to the number of trees.
    std::vector<uint32_t> vote_counts(const FeatureVector& f) const;

private:
    std::vector<std::string> class_names_;
    ForestHyperparams hyperparams_;
    std::vector<DecisionTree> trees_;
};

// Trains a random forest: each tree fits a bootstrap sample (with
// replacement, same size as the input) using Gini-impurity splits over
// max_features_per_split uniformly sampled candidate features and midpoint
// thresholds between adjacent distinct values. Deterministic in
// hyperparams.rng_seed: tree t draws from an independent stream derived from
// (seed, t), so serial and parallel training build identical forests.
// Labels are indices into class_names; a class may have zero instances
// (its label simply never appears in any leaf).
Forest train_forest(const std::vector<FeatureVector>& features,
                    const std::vector<uint16_t>& labels,
                    std::vector<std::string> class_names,
                    const ForestHyperparams& hp);

// Mean score of correctly predicted training instances, per class. Classes
// with no correct prediction fall back to the mean of the defined values,
// or 0.5 when nothing is defined.
ClassThresholds fit_thresholds(const Forest& forest,
                               const std::vector<FeatureVector>& features,
                               const std::vector<uint16_t>& labels);

// Accepts iff score >= tau[predicted class]; nullopt means discarded.
std::optional<ScoredPrediction> predict_accepted(const Forest& forest,
                                                 const ClassThresholds& thresholds,
                                                 const FeatureVector& f);

// Versioned, endianness-fixed binary serialization of a forest plus its
// thresholds. save/load round-trips are bit-exact.
std::string serialize_model(const Forest& forest, const ClassThresholds& thresholds);
std::pair<Forest, ClassThresholds> deserialize_model(const std::string& bytes);
void save_model(const std::string& path, const Forest& forest,
                const ClassThresholds& thresholds);
std::pair<Forest, ClassThresholds> load_model(const std::string& path);

}  // namespace flowsel
