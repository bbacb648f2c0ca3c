#include "flowsel/registry.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "flowsel/errors.hpp"
#include "flowsel/rng.hpp"

namespace flowsel {

namespace fs = std::filesystem;
using nlohmann::json;

ModelRegistry::ModelRegistry(std::vector<ContextModel> models)
    : models_(std::move(models)) {
    if (models_.empty()) throw std::invalid_argument("empty registry");
    for (const auto& m : models_)
        if (m.forest.class_names() != models_.front().forest.class_names())
            throw std::invalid_argument("registry models disagree on class names");
    for (size_t i = 0; i + 1 < models_.size(); ++i)
        for (size_t j = i + 1; j < models_.size(); ++j)
            if (models_[i].model_id == models_[j].model_id)
                throw std::invalid_argument("duplicate model id: " + models_[i].model_id);
}

const std::vector<std::string>& ModelRegistry::class_names() const {
    return models_.front().forest.class_names();
}

size_t ModelRegistry::global_index() const {
    for (size_t i = 0; i < models_.size(); ++i)
        if (models_[i].model_id == kGlobalModelId) return i;
    return npos;
}

const ContextModel* ModelRegistry::find(const std::string& id) const {
    for (const auto& m : models_)
        if (m.model_id == id) return &m;
    return nullptr;
}

ScoreDistribution build_score_distribution(const HomeTrainingData& data,
                                           const std::vector<std::string>& class_names,
                                           const ForestHyperparams& hp) {
    const size_t n = data.feats.size();
    if (n == 0) throw EmptyTrainingSet("no rows for score distribution");
    if (n == 1) {
        // Degenerate single-row context: score the row against itself.
        ForestHyperparams fold_hp = hp;
        fold_hp.rng_seed = derive_seed(hp.rng_seed, "cv-fold", 0);
        const Forest f = train_forest(data.feats, data.labels, class_names, fold_hp);
        return ScoreDistribution({f.predict(data.feats[0]).score});
    }

    const size_t n_folds = std::min<size_t>(10, n);

    // Round-robin fold assignment over a seed-shuffled permutation.
    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    SplitMix64 rng(derive_seed(hp.rng_seed, "cv-perm"));
    for (size_t i = n - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
    std::vector<uint8_t> fold_of(n);
    for (size_t i = 0; i < n; ++i)
        fold_of[perm[i]] = static_cast<uint8_t>(i % n_folds);

    std::vector<double> pooled;
    pooled.reserve(n);
    std::vector<FeatureVector> fold_feats;
    std::vector<uint16_t> fold_labels;
    for (size_t k = 0; k < n_folds; ++k) {
        fold_feats.clear();
        fold_labels.clear();
        for (size_t i = 0; i < n; ++i) {
            if (fold_of[i] == k) continue;
            fold_feats.push_back(data.feats[i]);
            fold_labels.push_back(data.labels[i]);
        }
        ForestHyperparams fold_hp = hp;
        fold_hp.rng_seed = derive_seed(hp.rng_seed, "cv-fold", k);
        const Forest f = train_forest(fold_feats, fold_labels, class_names, fold_hp);
        for (size_t i = 0; i < n; ++i)
            if (fold_of[i] == k) pooled.push_back(f.predict(data.feats[i]).score);
    }
    return ScoreDistribution(std::move(pooled));
}

ContextModel train_context_model(const std::string& model_id,
                                 const HomeTrainingData& data,
                                 const std::vector<std::string>& class_names,
                                 const ForestHyperparams& hp) {
    if (data.feats.empty())
        throw EmptyTrainingSet("no training rows for model " + model_id);
    ContextModel m;
    m.model_id = model_id;
    m.forest = train_forest(data.feats, data.labels, class_names, hp);
    m.thresholds = fit_thresholds(m.forest, data.feats, data.labels);
    m.train_score_dist = build_score_distribution(data, class_names, hp);
    return m;
}

std::vector<ContextModel> train_contextualized(
    const std::vector<HomeTrainingData>& per_home,
    const std::vector<std::string>& class_names, const ForestHyperparams& hp) {
    if (per_home.empty()) throw EmptyTrainingSet("no homes with training data");
    std::vector<ContextModel> models;
    models.reserve(per_home.size());
    for (const auto& home : per_home)
        models.push_back(train_context_model(home.home_id, home, class_names, hp));
    std::sort(models.begin(), models.end(),
              [](const auto& a, const auto& b) { return a.model_id < b.model_id; });
    return models;
}

ContextModel train_global(const std::vector<HomeTrainingData>& per_home,
                          const std::vector<std::string>& class_names,
                          const ForestHyperparams& hp) {
    HomeTrainingData all;
    all.home_id = kGlobalModelId;
    for (const auto& home : per_home) {
        all.feats.insert(all.feats.end(), home.feats.begin(), home.feats.end());
        all.labels.insert(all.labels.end(), home.labels.begin(), home.labels.end());
    }
    return train_context_model(kGlobalModelId, all, class_names, hp);
}

ModelRegistry build_registry(const std::vector<HomeTrainingData>& per_home,
                             const std::vector<std::string>& class_names,
                             const ForestHyperparams& hp) {
    for (const auto& home : per_home)
        if (home.home_id == kGlobalModelId)
            throw ConfigError("home id collides with the reserved GLOBAL model id");
    auto models = train_contextualized(per_home, class_names, hp);
    models.push_back(train_global(per_home, class_names, hp));
    return ModelRegistry(std::move(models));
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_scores(const std::string& path, const ScoreDistribution& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write score file: " + path);
    for (double v : d.samples()) out << format_double(v) << '\n';
}

ScoreDistribution read_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open score file: " + path);
    std::vector<double> samples;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size())
            throw ParseError("malformed score value '" + line + "'", line_no);
        samples.push_back(v);
    }
    return ScoreDistribution(std::move(samples));
}

}  // namespace

void save_registry(const ModelRegistry& registry, const std::string& dir,
                   const std::string& fingerprint) {
    fs::create_directories(dir);
    json manifest;
    manifest["format_version"] = 1;
    manifest["fingerprint"] = fingerprint;
    manifest["class_names"] = registry.class_names();
    const auto& hp = registry.models().front().forest.hyperparams();
    manifest["hyperparams"] = {{"trees", hp.n_trees},
                               {"max_features", hp.max_features_per_split},
                               {"max_depth", hp.max_depth},
                               {"seed", hp.rng_seed}};
    manifest["es_small_sample_correction"] = true;
    json entries = json::array();
    for (const auto& m : registry.models()) {
        const std::string model_file = m.model_id + ".model";
        const std::string scores_file = m.model_id + ".scores";
        save_model((fs::path(dir) / model_file).string(), m.forest, m.thresholds);
        write_scores((fs::path(dir) / scores_file).string(), m.train_score_dist);
        entries.push_back({{"id", m.model_id},
                           {"model_file", model_file},
                           {"scores_file", scores_file},
                           {"score_samples", m.train_score_dist.size()}});
    }
    manifest["models"] = std::move(entries);
    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest under " + dir);
    out << manifest.dump(2) << '\n';
}

ModelRegistry load_registry(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw ConfigError("no manifest.json under " + dir);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad manifest: ") + e.what());
    }
    if (manifest.value("format_version", 0) != 1)
        throw ConfigError("unsupported registry format version");
    std::vector<ContextModel> models;
    for (const auto& entry : manifest.at("models")) {
        ContextModel m;
        m.model_id = entry.at("id").get<std::string>();
        auto [forest, thresholds] =
            load_model((fs::path(dir) / entry.at("model_file").get<std::string>()).string());
        m.forest = std::move(forest);
        m.thresholds = std::move(thresholds);
        m.train_score_dist =
            read_scores((fs::path(dir) / entry.at("scores_file").get<std::string>()).string());
        models.push_back(std::move(m));
    }
    return ModelRegistry(std::move(models));
}

}  // namespace flowsel
