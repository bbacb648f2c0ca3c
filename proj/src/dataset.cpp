#include "flowsel/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "flowsel/errors.hpp"
#include "flowsel/flow_csv.hpp"

namespace flowsel {

namespace fs = std::filesystem;

const HomeData* Dataset::find_home(const std::string& id) const {
    for (const auto& h : homes)
        if (h.home_id == id) return &h;
    return nullptr;
}

bool Dataset::any_labels() const {
    for (const auto& h : homes)
        for (int32_t l : h.labels)
            if (l >= 0) return true;
    return false;
}

Dataset load_dataset(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path().string());
    if (files.empty()) throw ConfigError("no .csv files under " + dir);
    std::sort(files.begin(), files.end());

    // First pass: rows and label vocabulary.
    struct RawRow {
        int day;
        FeatureVector feats;
        std::string label;  // empty = unknown
    };
    std::map<std::string, std::vector<RawRow>> by_home;
    std::set<std::string> label_set;
    for (const auto& file : files) {
        for_each_flow(file, [&](FlowRecord&& r) {
            RawRow row;
            row.day = r.epoch_day;
            row.feats = extract_features(r);
            if (r.label) {
                row.label = *r.label;
                label_set.insert(row.label);
            }
            by_home[r.home_id].push_back(std::move(row));
        });
    }

    Dataset out;
    out.class_names.assign(label_set.begin(), label_set.end());
    std::map<std::string, int32_t> label_index;
    for (size_t i = 0; i < out.class_names.size(); ++i)
        label_index[out.class_names[i]] = static_cast<int32_t>(i);

    for (auto& [home_id, rows] : by_home) {
        HomeData h;
        h.home_id = home_id;
        h.min_day = rows.front().day;
        h.max_day = rows.front().day;
        for (auto& row : rows) {
            const uint32_t idx = static_cast<uint32_t>(h.feats.size());
            h.days.push_back(row.day);
            h.feats.push_back(row.feats);
            h.labels.push_back(row.label.empty() ? -1 : label_index[row.label]);
            h.day_rows[row.day].push_back(idx);
            h.min_day = std::min(h.min_day, row.day);
            h.max_day = std::max(h.max_day, row.day);
        }
        out.homes.push_back(std::move(h));
    }
    return out;
}

std::vector<HomeTrainingData> training_slices(const Dataset& data, int split_day) {
    std::vector<HomeTrainingData> out;
    for (const auto& h : data.homes) {
        HomeTrainingData slice;
        slice.home_id = h.home_id;
        for (size_t i = 0; i < h.size(); ++i) {
            if (split_day >= 0 && h.days[i] >= split_day) continue;
            if (h.labels[i] < 0)
                throw LabelsUnavailable("unlabeled training row in home " + h.home_id);
            slice.feats.push_back(h.feats[i]);
            slice.labels.push_back(static_cast<uint16_t>(h.labels[i]));
        }
        if (!slice.feats.empty()) out.push_back(std::move(slice));
    }
    return out;
}

}  // namespace flowsel
