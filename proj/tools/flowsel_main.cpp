// flowsel: IoT device-type inference from bidirectional flow records with
// drift-aware model selection. Subcommands cover the whole pipeline:
//   synth     generate a labeled synthetic multi-home dataset
//   train     build the model registry (per-home models + GLOBAL)
//   select    assign a model per unseen home (and per day in dynamic mode)
//   evaluate  run the full multi-run experiment protocol
// Exit codes: 0 ok, 2 input/config error, 3 policy/label mismatch, 4
// internal error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "flowsel/dataset.hpp"
#include "flowsel/errors.hpp"
#include "flowsel/experiment.hpp"
#include "flowsel/registry.hpp"
#include "flowsel/rng.hpp"
#include "flowsel/selection.hpp"
#include "flowsel/synthgen.hpp"

namespace fs = std::filesystem;
using namespace flowsel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPolicy = 3;
constexpr int kExitInternal = 4;

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Stable fingerprint of the effective command configuration; stamped into
// every output so a report can be traced back to its exact invocation.
std::string fingerprint(const std::map<std::string, std::string>& settings) {
    std::string canon;
    for (const auto& [k, v] : settings) {
        canon += k;
        canon += '=';
        canon += v;
        canon += '\n';
    }
    return hex64(detail::fnv1a64(canon));
}

struct ForestFlags {
    unsigned trees = 100;
    unsigned max_depth = 20;
    unsigned max_features = 5;

    ForestHyperparams hyperparams(uint64_t seed) const {
        ForestHyperparams hp;
        hp.n_trees = trees;
        hp.max_depth = max_depth;
        hp.max_features_per_split = max_features;
        hp.rng_seed = seed;
        return hp;
    }
};

void add_forest_flags(CLI::App* cmd, ForestFlags& f) {
    cmd->add_option("--trees", f.trees, "Trees per forest")
        ->envname("FLOWSEL_TREES");
    cmd->add_option("--max-depth", f.max_depth, "Maximum tree depth")
        ->envname("FLOWSEL_MAX_DEPTH");
    cmd->add_option("--max-features", f.max_features,
                    "Candidate features per split")
        ->envname("FLOWSEL_MAX_FEATURES");
}

int cmd_synth(const std::string& spec_file, const std::string& data_dir,
              std::optional<uint64_t> seed_override) {
    DriftSpec spec = load_drift_spec(spec_file);
    if (seed_override) spec.seed = *seed_override;
    generate_dataset(spec, data_dir);
    std::cout << "synth: " << spec.n_homes << " homes x " << spec.days << " days x "
              << spec.n_classes << " classes -> " << data_dir << "\n";
    return kExitOk;
}

int cmd_train(const std::string& data_dir, const std::string& registry_dir,
              int split_day, const std::vector<std::string>& homes,
              const ForestFlags& forest_flags, uint64_t seed) {
    Dataset data = load_dataset(data_dir);
    if (!homes.empty()) {
        std::vector<HomeData> kept;
        for (auto& h : data.homes)
            if (std::find(homes.begin(), homes.end(), h.home_id) != homes.end())
                kept.push_back(std::move(h));
        data.homes = std::move(kept);
        if (data.homes.empty()) throw ConfigError("--homes matched nothing");
    }

    std::vector<HomeTrainingData> slices;
    try {
        slices = training_slices(data, split_day);
    } catch (const LabelsUnavailable& e) {
        // Training data must be labeled; a missing label is an input error.
        throw ConfigError(e.what());
    }
    if (slices.empty()) throw ConfigError("no labeled training rows before split day");

    const ForestHyperparams hp = forest_flags.hyperparams(seed);
    const ModelRegistry registry = build_registry(slices, data.class_names, hp);

    const std::string fp = fingerprint({
        {"command", "train"},
        {"split_day", std::to_string(split_day)},
        {"trees", std::to_string(hp.n_trees)},
        {"max_depth", std::to_string(hp.max_depth)},
        {"max_features", std::to_string(hp.max_features_per_split)},
        {"seed", std::to_string(seed)},
        {"classes", std::to_string(data.class_names.size())},
    });
    save_registry(registry, registry_dir, fp);

    std::cout << "trained " << registry.size() << " models ("
              << registry.size() - 1 << " contextualized + GLOBAL), "
              << data.class_names.size() << " classes, fingerprint " << fp << "\n";
    for (const auto& m : registry.models()) {
        double tau_sum = 0.0;
        for (double t : m.thresholds.tau) tau_sum += t;
        std::cout << "  " << m.model_id << ": score_samples="
                  << m.train_score_dist.size() << " mean_tau="
                  << tau_sum / static_cast<double>(m.thresholds.tau.size()) << "\n";
    }
    return kExitOk;
}

int cmd_select(const std::string& data_dir, const std::string& registry_dir,
               const std::string& report_dir, const std::string& policy_name,
               const std::string& metric, const std::string& regime,
               const std::string& candidates, int window_days, int split_day,
               uint64_t seed) {
    const ModelRegistry registry = load_registry(registry_dir);
    const Dataset data = load_dataset(data_dir);

    SelectionPolicy policy;
    policy.mode = mode_from_name(policy_name);
    policy.metric = metric_from_name(metric);
    policy.regime = regime_from_name(regime);
    policy.candidates = candidate_set_from_name(candidates);
    policy.window_days = window_days;
    policy.random_seed = seed;
    if (policy.window_days < 1) throw ConfigError("--window-days must be >= 1");
    if (policy.mode == SelectionMode::oracle && !data.any_labels())
        throw LabelsUnavailable("oracle selection requires labeled data");

    int end_day = split_day;
    for (const auto& h : data.homes) end_day = std::max(end_day, h.max_day);

    Assignment all;
    for (const auto& home : data.homes) {
        HomePredictionCache cache(registry, home);
        Assignment a = run_selection(policy, cache, split_day, end_day);
        all.insert(all.end(), a.begin(), a.end());
    }

    fs::create_directories(report_dir);
    const fs::path out_path = fs::path(report_dir) / "assignment.csv";
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + out_path.string());
    write_assignment_csv(out, all);

    const std::string fp = fingerprint({
        {"command", "select"},
        {"policy", policy_name},
        {"metric", metric},
        {"regime", regime},
        {"candidates", candidates},
        {"window_days", std::to_string(window_days)},
        {"split_day", std::to_string(split_day)},
        {"seed", std::to_string(seed)},
    });
    std::ofstream meta(fs::path(report_dir) / "assignment.meta.json", std::ios::binary);
    meta << "{\n  \"fingerprint\": \"" << fp << "\",\n  \"policy\": \"" << policy_name
         << "\",\n  \"metric\": \"" << metric << "\",\n  \"regime\": \"" << regime
         << "\",\n  \"candidates\": \"" << candidates << "\",\n  \"window_days\": "
         << window_days << ",\n  \"split_day\": " << split_day << ",\n  \"seed\": "
         << seed << "\n}\n";

    std::cout << "selected models for " << data.homes.size() << " homes, "
              << all.size() << " assignment rows, fingerprint " << fp << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& data_dir, const std::string& report_dir,
                 int runs, int n_seen, int split_day, int window_days,
                 const ForestFlags& forest_flags, uint64_t seed) {
    const Dataset data = load_dataset(data_dir);
    ExperimentConfig config;
    config.n_runs = runs;
    config.n_seen = n_seen;
    config.split_day = split_day;
    config.window_days = window_days;
    config.seed = seed;
    config.hyperparams = forest_flags.hyperparams(seed);

    const auto reports = run_experiment(data, config);

    const std::string fp = fingerprint({
        {"command", "evaluate"},
        {"runs", std::to_string(runs)},
        {"n_seen", std::to_string(n_seen)},
        {"split_day", std::to_string(split_day)},
        {"window_days", std::to_string(window_days)},
        {"trees", std::to_string(config.hyperparams.n_trees)},
        {"max_depth", std::to_string(config.hyperparams.max_depth)},
        {"max_features", std::to_string(config.hyperparams.max_features_per_split)},
        {"seed", std::to_string(seed)},
    });

    fs::create_directories(report_dir);
    for (const auto& report : reports) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%02d.csv", report.run_id);
        std::ofstream out(fs::path(report_dir) / name, std::ios::binary);
        if (!out) throw ConfigError("cannot write report under " + report_dir);
        write_run_report_csv(out, report);
    }
    std::ofstream summary(fs::path(report_dir) / "summary.txt", std::ios::binary);
    write_summary(summary, reports, fp);

    std::ostringstream echo;
    write_summary(echo, reports, fp);
    std::cout << echo.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IoT device-type inference from flow records with drift-aware "
                 "model selection"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI config file");

    std::string data_dir;
    std::string registry_dir;
    std::string report_dir;
    uint64_t seed = 1;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    std::string spec_file;
    uint64_t synth_seed = 0;
    synth->add_option("spec", spec_file, "Drift spec file (key=value lines)")
        ->required();
    synth->add_option("--data", data_dir, "Output dataset directory")
        ->required()
        ->envname("FLOWSEL_DATA");
    synth->add_option("--seed", synth_seed, "Override the spec seed")
        ->envname("FLOWSEL_SEED");

    // train
    auto* train = app.add_subcommand("train", "Train the model registry");
    int split_day = -1;
    std::vector<std::string> homes;
    ForestFlags train_forest_flags;
    train->add_option("--data", data_dir, "Labeled flow CSV directory")
        ->required()
        ->envname("FLOWSEL_DATA");
    train->add_option("--registry", registry_dir, "Registry output directory")
        ->required()
        ->envname("FLOWSEL_REGISTRY");
    train->add_option("--split-day", split_day,
                      "Train on days before this (default: all days)")
        ->envname("FLOWSEL_SPLIT_DAY");
    train->add_option("--homes", homes, "Only train on these home ids")
        ->delimiter(',');
    add_forest_flags(train, train_forest_flags);
    train->add_option("--seed", seed, "Master RNG seed")->envname("FLOWSEL_SEED");

    // select
    auto* select = app.add_subcommand("select", "Assign models to unseen homes");
    std::string policy = "distance";
    std::string metric = "ks";
    std::string regime = "dynamic";
    std::string candidates = "ctx+global";
    int window_days = 30;
    int select_split_day = 0;
    select->add_option("--data", data_dir, "Unseen homes' flow CSV directory")
        ->required()
        ->envname("FLOWSEL_DATA");
    select->add_option("--registry", registry_dir, "Registry directory")
        ->required()
        ->envname("FLOWSEL_REGISTRY");
    select->add_option("--report", report_dir, "Output directory")
        ->required()
        ->envname("FLOWSEL_REPORT");
    select->add_option("--policy", policy, "oracle|distance|random")
        ->envname("FLOWSEL_POLICY");
    select->add_option("--metric", metric, "ks|kr|es|js")->envname("FLOWSEL_METRIC");
    select->add_option("--regime", regime, "static|dynamic")->envname("FLOWSEL_REGIME");
    select->add_option("--candidates", candidates, "ctx|ctx+global|global")
        ->envname("FLOWSEL_CANDIDATES");
    select->add_option("--window-days", window_days, "Dynamic selection window")
        ->envname("FLOWSEL_WINDOW_DAYS");
    select->add_option("--split-day", select_split_day, "First test day")
        ->required()
        ->envname("FLOWSEL_SPLIT_DAY");
    select->add_option("--seed", seed, "Master RNG seed")->envname("FLOWSEL_SEED");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Run the experiment protocol");
    int runs = 10;
    int n_seen = 5;
    int eval_split_day = 30;
    int eval_window_days = 30;
    ForestFlags eval_forest_flags;
    evaluate->add_option("--data", data_dir, "Labeled flow CSV directory")
        ->required()
        ->envname("FLOWSEL_DATA");
    evaluate->add_option("--report", report_dir, "Report output directory")
        ->required()
        ->envname("FLOWSEL_REPORT");
    evaluate->add_option("--runs", runs, "Number of runs")->envname("FLOWSEL_RUNS");
    evaluate->add_option("--n-seen", n_seen, "Seen homes per run")
        ->envname("FLOWSEL_N_SEEN");
    evaluate->add_option("--split-day", eval_split_day, "First test day")
        ->envname("FLOWSEL_SPLIT_DAY");
    evaluate->add_option("--window-days", eval_window_days, "Dynamic selection window")
        ->envname("FLOWSEL_WINDOW_DAYS");
    add_forest_flags(evaluate, eval_forest_flags);
    evaluate->add_option("--seed", seed, "Master RNG seed")->envname("FLOWSEL_SEED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (synth->parsed())
            return cmd_synth(spec_file, data_dir,
                             synth->count("--seed") > 0
                                 ? std::optional<uint64_t>(synth_seed)
                                 : std::nullopt);
        if (train->parsed())
            return cmd_train(data_dir, registry_dir, split_day, homes,
                             train_forest_flags, seed);
        if (select->parsed())
            return cmd_select(data_dir, registry_dir, report_dir, policy, metric,
                              regime, candidates, window_days, select_split_day, seed);
        if (evaluate->parsed())
            return cmd_evaluate(data_dir, report_dir, runs, n_seen, eval_split_day,
                                eval_window_days, eval_forest_flags, seed);
    } catch (const LabelsUnavailable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPolicy;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InvariantViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const EmptyTrainingSet& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}
