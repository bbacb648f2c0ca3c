#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowsel/flow.hpp"

namespace flowsel {

// One home's flows with features already extracted. Rows keep file order.
struct HomeData {
    std::string home_id;
    std::vector<int> days;              // per row
    std::vector<FeatureVector> feats;   // per row
    std::vector<int32_t> labels;        // index into Dataset::class_names, -1 unknown
    std::map<int, std::vector<uint32_t>> day_rows;  // day -> row indices
    int min_day = 0;
    int max_day = -1;

    size_t size() const { return feats.size(); }
};

// Homes sorted by id; class names are the sorted distinct labels seen
// anywhere in the input.
struct Dataset {
    std::vector<std::string> class_names;
    std::vector<HomeData> homes;

    const HomeData* find_home(const std::string& id) const;
    bool any_labels() const;
};

// Loads every *.csv under `dir` (sorted by filename) and groups rows by
// home_id. Throws the parser's errors unchanged; ConfigError when the
// directory holds no csv files.
Dataset load_dataset(const std::string& dir);

// Per-home labeled training matrix, the unit registry training consumes.
struct HomeTrainingData {
    std::string home_id;
    std::vector<FeatureVector> feats;
    std::vector<uint16_t> labels;
};

// Extracts rows with epoch_day < split_day (every day when split_day < 0).
// Rows without a label throw LabelsUnavailable since training data must be
// labeled. Homes left with zero rows are dropped.
std::vector<HomeTrainingData> training_slices(const Dataset& data, int split_day);

}  // namespace flowsel
