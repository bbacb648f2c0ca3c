#include "flowsel/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "bytes.hpp"
#include "flowsel/errors.hpp"
#include "flowsel/rng.hpp"

namespace flowsel {

namespace {

constexpr char kModelMagic[8] = {'F', 'L', 'O', 'W', 'S', 'E', 'L', 'M'};
constexpr uint32_t kModelVersion = 1;

// Midpoint between adjacent distinct values, nudged down when rounding lands
// it on the upper value so that `value <= threshold` still separates the two.
double split_threshold(double lo, double hi) {
    const double mid = (lo + hi) * 0.5;
    return mid >= hi ? lo : mid;
}

struct TreeBuilder {
    const std::vector<double>& columns;  // column-major, columns[f*n + row]
    const std::vector<uint16_t>& labels;
    size_t n_rows;
    size_t n_classes;
    const ForestHyperparams& hp;
    SplitMix64 rng;
    DecisionTree tree;

    std::vector<uint32_t> samples;                  // bootstrap rows, partitioned in place
    std::vector<std::pair<double, uint16_t>> sorted; // (value, label) scratch
    std::vector<uint32_t> node_counts;
    std::vector<uint32_t> left_counts;

    TreeBuilder(const std::vector<double>& cols, const std::vector<uint16_t>& labs,
                size_t n, size_t k, const ForestHyperparams& hyper, uint64_t seed)
        : columns(cols), labels(labs), n_rows(n), n_classes(k), hp(hyper), rng(seed) {
        samples.resize(n);
        for (auto& s : samples)
            s = static_cast<uint32_t>(rng.uniform_below(n));
        sorted.resize(n);
        node_counts.resize(k);
        left_counts.resize(k);
    }

    uint32_t make_leaf(size_t begin, size_t end) {
        TreeNode node;
        node.hist_begin = static_cast<uint32_t>(tree.histogram.size());
        std::fill(node_counts.begin(), node_counts.end(), 0u);
        for (size_t i = begin; i < end; ++i) ++node_counts[labels[samples[i]]];
        uint32_t best_count = 0;
        for (size_t c = 0; c < n_classes; ++c) {
            if (node_counts[c] == 0) continue;
            tree.histogram.push_back({static_cast<uint16_t>(c), node_counts[c]});
            if (node_counts[c] > best_count) {
                best_count = node_counts[c];
                node.voted_class = static_cast<uint16_t>(c);
            }
        }
        node.hist_count = static_cast<uint32_t>(tree.histogram.size()) - node.hist_begin;
        tree.nodes.push_back(node);
        return static_cast<uint32_t>(tree.nodes.size()) - 1;
    }

    uint32_t build(size_t begin, size_t end, uint32_t depth) {
        const size_t m = end - begin;
        std::fill(node_counts.begin(), node_counts.end(), 0u);
        size_t present = 0;
        double node_sumsq = 0.0;
        for (size_t i = begin; i < end; ++i) ++node_counts[labels[samples[i]]];
        for (uint32_t c : node_counts) {
            if (c == 0) continue;
            ++present;
            node_sumsq += static_cast<double>(c) * c;
        }
        if (m < 2 || present <= 1 || depth >= hp.max_depth) return make_leaf(begin, end);

        // Uniformly sample the candidate features for this node.
        std::array<uint16_t, kFeatureCount> feats;
        for (size_t i = 0; i < kFeatureCount; ++i) feats[i] = static_cast<uint16_t>(i);
        const size_t n_candidates =
            std::min<size_t>(hp.max_features_per_split, kFeatureCount);
        for (size_t k = 0; k < n_candidates; ++k) {
            const size_t j = k + rng.uniform_below(kFeatureCount - k);
            std::swap(feats[k], feats[j]);
        }

        const double baseline = node_sumsq / static_cast<double>(m);
        double best_q = baseline + 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        for (size_t k = 0; k < n_candidates; ++k) {
            const uint16_t f = feats[k];
            const double* col = columns.data() + static_cast<size_t>(f) * n_rows;
            for (size_t i = begin; i < end; ++i) {
                const uint32_t row = samples[i];
                sorted[i - begin] = {col[row], labels[row]};
            }
            std::sort(sorted.begin(), sorted.begin() + m,
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (sorted[0].first == sorted[m - 1].first) continue;

            std::fill(left_counts.begin(), left_counts.end(), 0u);
            double sumsq_l = 0.0;
            double sumsq_r = node_sumsq;
            for (size_t i = 0; i + 1 < m; ++i) {
                const uint16_t c = sorted[i].second;
                const double lc = left_counts[c];
                const double rc = static_cast<double>(node_counts[c]) - lc;
                sumsq_l += 2.0 * lc + 1.0;
                sumsq_r -= 2.0 * rc - 1.0;
                ++left_counts[c];
                if (sorted[i].first == sorted[i + 1].first) continue;
                const double q = sumsq_l / static_cast<double>(i + 1) +
                                 sumsq_r / static_cast<double>(m - i - 1);
                if (q > best_q) {
                    best_q = q;
                    best_feature = f;
                    best_threshold = split_threshold(sorted[i].first, sorted[i + 1].first);
                }
            }
        }

        // No sampled candidate improves impurity: stop here.
        if (best_feature < 0) return make_leaf(begin, end);

        const double* col = columns.data() + static_cast<size_t>(best_feature) * n_rows;
        const auto mid_it =
            std::partition(samples.begin() + begin, samples.begin() + end,
                           [&](uint32_t row) { return col[row] <= best_threshold; });
        const size_t mid = static_cast<size_t>(mid_it - samples.begin());

        TreeNode node;
        node.feature = static_cast<int16_t>(best_feature);
        node.threshold = best_threshold;
        tree.nodes.push_back(node);
        const uint32_t index = static_cast<uint32_t>(tree.nodes.size()) - 1;
        const uint32_t left = build(begin, mid, depth + 1);
        const uint32_t right = build(mid, end, depth + 1);
        tree.nodes[index].left = left;
        tree.nodes[index].right = right;
        return index;
    }
};

}  // namespace

uint16_t DecisionTree::vote(const FeatureVector& f) const {
    uint32_t idx = 0;
    while (nodes[idx].feature >= 0) {
        const TreeNode& n = nodes[idx];
        idx = f.values[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[idx].voted_class;
}

Forest::Forest(std::vector<std::string> class_names, ForestHyperparams hp,
               std::vector<DecisionTree> trees)
    : class_names_(std::move(class_names)),
      hyperparams_(hp),
      trees_(std::move(trees)) {}

std::vector<uint32_t> Forest::vote_counts(const FeatureVector& f) const {
    std::vector<uint32_t> votes(class_names_.size(), 0);
    for (const auto& tree : trees_) ++votes[tree.vote(f)];
    return votes;
}

ScoredPrediction Forest::predict(const FeatureVector& f) const {
    const auto votes = vote_counts(f);
    size_t best = 0;
    for (size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = c;
    return {static_cast<uint16_t>(best),
            static_cast<double>(votes[best]) / static_cast<double>(trees_.size())};
}

Forest train_forest(const std::vector<FeatureVector>& features,
                    const std::vector<uint16_t>& labels,
                    std::vector<std::string> class_names,
                    const ForestHyperparams& hp) {
    if (features.empty()) throw EmptyTrainingSet("no training rows");
    if (features.size() != labels.size())
        throw std::invalid_argument("features/labels size mismatch");
    if (class_names.empty()) throw std::invalid_argument("no classes");
    if (class_names.size() > 65535) throw std::invalid_argument("too many classes");
    if (hp.n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (hp.max_features_per_split < 1 || hp.max_features_per_split > kFeatureCount)
        throw ConfigError("max_features_per_split out of range");
    if (hp.max_depth < 1 || hp.max_depth > 64) throw ConfigError("max_depth out of range");
    for (uint16_t l : labels)
        if (l >= class_names.size()) throw std::invalid_argument("label out of range");

    const size_t n = features.size();
    std::vector<double> columns(kFeatureCount * n);
    for (size_t f = 0; f < kFeatureCount; ++f)
        for (size_t i = 0; i < n; ++i) columns[f * n + i] = features[i].values[f];

    std::vector<DecisionTree> trees(hp.n_trees);
    auto train_range = [&](uint32_t first, uint32_t stride) {
        for (uint32_t t = first; t < hp.n_trees; t += stride) {
            TreeBuilder builder(columns, labels, n, class_names.size(), hp,
                                derive_seed(hp.rng_seed, "tree", t));
            builder.build(0, n, 0);
            trees[t] = std::move(builder.tree);
        }
    };

    const uint32_t n_workers = std::max(
        1u, std::min(hp.n_trees, std::thread::hardware_concurrency()));
    if (n_workers == 1) {
        train_range(0, 1);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (uint32_t w = 0; w < n_workers; ++w)
            workers.emplace_back(train_range, w, n_workers);
        for (auto& worker : workers) worker.join();
    }
    return Forest(std::move(class_names), hp, std::move(trees));
}

ClassThresholds fit_thresholds(const Forest& forest,
                               const std::vector<FeatureVector>& features,
                               const std::vector<uint16_t>& labels) {
    const size_t k = forest.class_names().size();
    std::vector<double> score_sum(k, 0.0);
    std::vector<uint32_t> correct(k, 0);
    for (size_t i = 0; i < features.size(); ++i) {
        const auto p = forest.predict(features[i]);
        if (p.class_index == labels[i]) {
            score_sum[labels[i]] += p.score;
            ++correct[labels[i]];
        }
    }
    ClassThresholds th;
    th.tau.assign(k, -1.0);
    double defined_sum = 0.0;
    size_t defined = 0;
    for (size_t c = 0; c < k; ++c) {
        if (correct[c] == 0) continue;
        th.tau[c] = score_sum[c] / static_cast<double>(correct[c]);
        defined_sum += th.tau[c];
        ++defined;
    }
    const double fallback = defined > 0 ? defined_sum / static_cast<double>(defined) : 0.5;
    for (double& t : th.tau)
        if (t < 0.0) t = fallback;
    return th;
}

std::optional<ScoredPrediction> predict_accepted(const Forest& forest,
                                                 const ClassThresholds& thresholds,
                                                 const FeatureVector& f) {
    const auto p = forest.predict(f);
    if (p.score >= thresholds.tau[p.class_index]) return p;
    return std::nullopt;
}

std::string serialize_model(const Forest& forest, const ClassThresholds& thresholds) {
    detail::ByteWriter w;
    w.raw(std::string_view(kModelMagic, sizeof kModelMagic));
    w.u32(kModelVersion);
    w.u32(static_cast<uint32_t>(forest.class_names().size()));
    for (const auto& name : forest.class_names()) w.str(name);
    const auto& hp = forest.hyperparams();
    w.u32(hp.n_trees);
    w.u32(hp.max_features_per_split);
    w.u32(hp.max_depth);
    w.u64(hp.rng_seed);
    w.u32(static_cast<uint32_t>(forest.trees().size()));
    for (const auto& tree : forest.trees()) {
        w.u32(static_cast<uint32_t>(tree.nodes.size()));
        for (const auto& n : tree.nodes) {
            w.i16(n.feature);
            w.u16(n.voted_class);
            w.f64(n.threshold);
            w.u32(n.left);
            w.u32(n.right);
            w.u32(n.hist_begin);
            w.u32(n.hist_count);
        }
        w.u32(static_cast<uint32_t>(tree.histogram.size()));
        for (const auto& h : tree.histogram) {
            w.u16(h.class_index);
            w.u32(h.count);
        }
    }
    w.u32(static_cast<uint32_t>(thresholds.tau.size()));
    for (double t : thresholds.tau) w.f64(t);
    return w.take();
}

std::pair<Forest, ClassThresholds> deserialize_model(const std::string& bytes) {
    detail::ByteReader r(bytes);
    for (char expect : kModelMagic)
        if (static_cast<char>(r.u8()) != expect)
            throw std::runtime_error("not a model file (bad magic)");
    if (r.u32() != kModelVersion) throw std::runtime_error("unsupported model version");

    const uint32_t k = r.u32();
    std::vector<std::string> names(k);
    for (auto& name : names) name = r.str();
    ForestHyperparams hp;
    hp.n_trees = r.u32();
    hp.max_features_per_split = r.u32();
    hp.max_depth = r.u32();
    hp.rng_seed = r.u64();
    const uint32_t n_trees = r.u32();
    std::vector<DecisionTree> trees(n_trees);
    for (auto& tree : trees) {
        tree.nodes.resize(r.u32());
        for (auto& n : tree.nodes) {
            n.feature = r.i16();
            n.voted_class = r.u16();
            n.threshold = r.f64();
            n.left = r.u32();
            n.right = r.u32();
            n.hist_begin = r.u32();
            n.hist_count = r.u32();
        }
        tree.histogram.resize(r.u32());
        for (auto& h : tree.histogram) {
            h.class_index = r.u16();
            h.count = r.u32();
        }
    }
    ClassThresholds th;
    th.tau.resize(r.u32());
    for (double& t : th.tau) t = r.f64();
    if (!r.done()) throw std::runtime_error("trailing bytes in model file");
    return {Forest(std::move(names), hp, std::move(trees)), std::move(th)};
}

void save_model(const std::string& path, const Forest& forest,
                const ClassThresholds& thresholds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write model file: " + path);
    const std::string bytes = serialize_model(forest, thresholds);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::pair<Forest, ClassThresholds> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace flowsel
