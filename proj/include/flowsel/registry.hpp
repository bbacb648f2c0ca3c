#pragma once

#include <string>
#include <vector>

#include "flowsel/dataset.hpp"
#include "flowsel/forest.hpp"
#include "flowsel/score_dist.hpp"

namespace flowsel {

inline constexpr const char* kGlobalModelId = "GLOBAL";

// A trained classifier bound to one context (home), or the global model:
// forest, per-class acceptance thresholds, and the cross-validated score
// distribution of its own training data.
struct ContextModel {
    std::string model_id;
    Forest forest;
    ClassThresholds thresholds;
    ScoreDistribution train_score_dist;
};

// Candidate models in fixed order: contextualized models sorted by id, then
// GLOBAL last. All models share one class_names ordering.
class ModelRegistry {
public:
    ModelRegistry() = default;
    explicit ModelRegistry(std::vector<ContextModel> models);

    const std::vector<ContextModel>& models() const { return models_; }
    const ContextModel& at(size_t i) const { return models_[i]; }
    size_t size() const { return models_.size(); }
    const std::vector<std::string>& class_names() const;

    // Index of GLOBAL, or npos when the registry has no global model.
    size_t global_index() const;
    const ContextModel* find(const std::string& id) const;

    static constexpr size_t npos = static_cast<size_t>(-1);

private:
    std::vector<ContextModel> models_;
};

// Cross-validated score distribution of a model's training data: rows are
// split into min(10, n) folds by round-robin over a seed-shuffled
// permutation; each fold is scored by a forest trained on the others with a
// fold-derived seed. Pools one held-out score per row (correct and incorrect
// alike).
ScoreDistribution build_score_distribution(const HomeTrainingData& data,
                                           const std::vector<std::string>& class_names,
                                           const ForestHyperparams& hp);

// Trains forest + thresholds + score distribution for one context.
ContextModel train_context_model(const std::string& model_id,
                                 const HomeTrainingData& data,
                                 const std::vector<std::string>& class_names,
                                 const ForestHyperparams& hp);

// One model per home, each trained only on that home's rows.
std::vector<ContextModel> train_contextualized(
    const std::vector<HomeTrainingData>& per_home,
    const std::vector<std::string>& class_names, const ForestHyperparams& hp);

// One model over the concatenation of all homes' rows, home order then row
// order.
ContextModel train_global(const std::vector<HomeTrainingData>& per_home,
                          const std::vector<std::string>& class_names,
                          const ForestHyperparams& hp);

// Contextualized models plus GLOBAL, assembled in registry order.
ModelRegistry build_registry(const std::vector<HomeTrainingData>& per_home,
                             const std::vector<std::string>& class_names,
                             const ForestHyperparams& hp);

// Directory layout: manifest.json plus per-model binary files and score
// samples (one value per line). The manifest fixes registry order.
void save_registry(const ModelRegistry& registry, const std::string& dir,
                   const std::string& fingerprint);
ModelRegistry load_registry(const std::string& dir);

}  // namespace flowsel
