#include "flowsel/synthgen.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "flowsel/errors.hpp"
#include "flowsel/flow.hpp"
#include "flowsel/flow_csv.hpp"
#include "flowsel/rng.hpp"

namespace flowsel {

namespace fs = std::filesystem;

namespace {

// Plausible value ranges for the 11 per-direction features; centroids are
// drawn inside, noise and context shifts are scaled by the range width.
struct Range {
    double lo;
    double hi;
};
constexpr std::array<Range, kDirectionFeatureCount> kRanges = {{
    {10, 400},     // packet_total_count
    {800, 80000},  // octet_total_count
    {0, 200},      // small_packet_count
    {0, 150},      // large_packet_count
    {5, 300},      // non_empty_packet_count
    {400, 60000},  // data_byte_count
    {1, 3000},     // average_interarrival_time
    {20, 1200},    // first_non_empty_packet_size
    {60, 1448},    // max_packet_size
    {0, 500},      // std_payload_length
    {0, 800},      // std_interarrival_time
}};

struct ClassProfile {
    std::array<double, 22> centroid;   // fwd then rev
    std::array<double, 22> direction;  // context-shift direction, range units
    std::array<double, 6> service_weights;
};

std::vector<ClassProfile> build_profiles(const DriftSpec& spec) {
    SplitMix64 rng(derive_seed(spec.seed, "profiles"));
    std::vector<ClassProfile> profiles(spec.n_classes);
    for (int c = 0; c < spec.n_classes; ++c) {
        auto& p = profiles[static_cast<size_t>(c)];
        for (size_t d = 0; d < 22; ++d) {
            const Range r = kRanges[d % kDirectionFeatureCount];
            const double width = r.hi - r.lo;
            p.centroid[d] = r.lo + (0.15 + 0.7 * rng.uniform01()) * width;
            p.direction[d] = (rng.uniform01() - 0.5) * 0.3 * width;
        }
        // One dominant service per class, the rest uniform leftovers.
        const size_t dominant = static_cast<size_t>(c) % 6;
        for (size_t s = 0; s < 6; ++s)
            p.service_weights[s] = s == dominant ? 0.55 : 0.09;
    }
    // A context step blends "toward the next class" with the random component
    // above. Shifted classes then land partly on a neighbour class (models
    // from the wrong context misclassify them with confidence) and partly in
    // empty feature space (scores spread out), so both label-based and
    // score-distribution selection have something to detect.
    for (int c = 0; c < spec.n_classes; ++c) {
        auto& p = profiles[static_cast<size_t>(c)];
        const auto& next = profiles[static_cast<size_t>((c + 1) % spec.n_classes)];
        for (size_t d = 0; d < 22; ++d)
            p.direction[d] += 0.5 * (next.centroid[d] - p.centroid[d]);
    }
    return profiles;
}

// Restores the per-direction invariants after sampling: clip, round the
// integral dimensions, then order the dependent counters.
void repair_direction(std::array<double, kDirectionFeatureCount>& v, DirectionStats& d) {
    for (double& x : v)
        if (x < 0.0) x = 0.0;
    auto as_count = [](double x) { return static_cast<uint64_t>(std::llround(x)); };
    d.packet_total_count = as_count(v[0]);
    d.octet_total_count = as_count(v[1]);
    d.small_packet_count = as_count(v[2]);
    d.large_packet_count = as_count(v[3]);
    d.non_empty_packet_count = as_count(v[4]);
    d.data_byte_count = as_count(v[5]);
    d.average_interarrival_time = v[6];
    d.first_non_empty_packet_size = as_count(v[7]);
    d.max_packet_size = as_count(v[8]);
    d.std_payload_length = v[9];
    d.std_interarrival_time = v[10];

    d.non_empty_packet_count = std::min(d.non_empty_packet_count, d.packet_total_count);
    d.small_packet_count = std::min(d.small_packet_count, d.packet_total_count);
    d.large_packet_count =
        std::min(d.large_packet_count, d.packet_total_count - d.small_packet_count);
    if (d.non_empty_packet_count >= 1)
        d.data_byte_count = std::max(d.data_byte_count, d.first_non_empty_packet_size);
}

struct ServicePorts {
    uint8_t proto;
    uint16_t dport;
};

ServicePorts service_ports(size_t service, int class_index) {
    switch (service) {
        case kServiceHttp: return {kProtoTcp, 80};
        case kServiceTls: return {kProtoTcp, 443};
        case kServiceDns: return {kProtoUdp, 53};
        case kServiceNtp: return {kProtoUdp, 123};
        case kServiceOtherTcp:
            return {kProtoTcp, static_cast<uint16_t>(40000 + class_index)};
        default: return {kProtoUdp, static_cast<uint16_t>(42000 + class_index)};
    }
}

std::string class_name(int c) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "dev%02d", c);
    return buf;
}

std::string home_name(int h) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "home%02d", h);
    return buf;
}

}  // namespace

void DriftSpec::validate() const {
    if (n_homes < 1 || n_classes < 1 || days < 1)
        throw ConfigError("n_homes, n_classes and days must be >= 1");
    if (n_classes > 99) throw ConfigError("n_classes must fit two digits");
    if (flows_per_class_per_day <= 0)
        throw ConfigError("flows_per_class_per_day must be positive");
    if (n_contexts < 0) throw ConfigError("n_contexts must be >= 0");
    if (drift_day < -1 || drift_day > days)
        throw ConfigError("drift_day must be within [0, days] (or -1 to disable)");
    if (noise_sigma < 0) throw ConfigError("noise_sigma must be >= 0");
}

DriftSpec load_drift_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spec file: " + path);
    DriftSpec spec;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        const size_t eq = line.find('=', start);
        if (eq == std::string::npos)
            throw ParseError("expected key=value", line_no);
        std::string key = line.substr(start, eq - start);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        const size_t vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? "" : value.substr(vstart);

        auto as_int = [&](int& out) {
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
            if (ec != std::errc() || ptr != value.data() + value.size())
                throw ParseError("malformed integer for " + key, line_no);
        };
        auto as_double = [&](double& out) {
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
            if (ec != std::errc() || ptr != value.data() + value.size())
                throw ParseError("malformed number for " + key, line_no);
        };
        if (key == "n_homes") as_int(spec.n_homes);
        else if (key == "n_classes") as_int(spec.n_classes);
        else if (key == "days") as_int(spec.days);
        else if (key == "flows_per_class_per_day") as_double(spec.flows_per_class_per_day);
        else if (key == "n_contexts") as_int(spec.n_contexts);
        else if (key == "context_offset_scale") as_double(spec.context_offset_scale);
        else if (key == "drift_day") as_int(spec.drift_day);
        else if (key == "drift_delta") as_double(spec.drift_delta);
        else if (key == "noise_sigma") as_double(spec.noise_sigma);
        else if (key == "seed") {
            uint64_t s = 0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s);
            if (ec != std::errc() || ptr != value.data() + value.size())
                throw ParseError("malformed seed", line_no);
            spec.seed = s;
        } else {
            throw ParseError("unknown spec key: " + key, line_no);
        }
    }
    spec.validate();
    return spec;
}

void generate_dataset(const DriftSpec& spec, const std::string& out_dir) {
    spec.validate();
    fs::create_directories(out_dir);
    const auto profiles = build_profiles(spec);

    for (int h = 0; h < spec.n_homes; ++h) {
        SplitMix64 rng(derive_seed(spec.seed, "home", static_cast<uint64_t>(h)));
        const int context = spec.n_contexts > 0 ? h % spec.n_contexts : h;

        std::ofstream out(fs::path(out_dir) / (home_name(h) + ".csv"), std::ios::binary);
        if (!out) throw ConfigError("cannot write dataset under " + out_dir);
        out << flow_csv_header(true) << '\n';

        FlowRecord r;
        r.home_id = home_name(h);
        for (int day = 0; day < spec.days; ++day) {
            const double offset =
                static_cast<double>(context) * spec.context_offset_scale +
                (day >= spec.effective_drift_day() ? spec.drift_delta : 0.0);
            for (int c = 0; c < spec.n_classes; ++c) {
                const auto& profile = profiles[static_cast<size_t>(c)];
                const uint64_t n_flows = rng.poisson(spec.flows_per_class_per_day);
                for (uint64_t flow = 0; flow < n_flows; ++flow) {
                    std::array<double, 22> values;
                    for (size_t d = 0; d < 22; ++d) {
                        const Range range = kRanges[d % kDirectionFeatureCount];
                        const double noise =
                            rng.normal() * spec.noise_sigma * (range.hi - range.lo);
                        values[d] = profile.centroid[d] + offset * profile.direction[d] +
                                    noise;
                    }
                    std::array<double, kDirectionFeatureCount> fwd;
                    std::array<double, kDirectionFeatureCount> rev;
                    std::copy_n(values.begin(), kDirectionFeatureCount, fwd.begin());
                    std::copy_n(values.begin() + kDirectionFeatureCount,
                                kDirectionFeatureCount, rev.begin());
                    repair_direction(fwd, r.fwd);
                    repair_direction(rev, r.rev);

                    double u = rng.uniform01();
                    size_t service = 5;
                    for (size_t s = 0; s < 6; ++s) {
                        if (u < profile.service_weights[s]) {
                            service = s;
                            break;
                        }
                        u -= profile.service_weights[s];
                    }
                    const ServicePorts ports = service_ports(service, c);
                    r.epoch_day = day;
                    r.five_tuple.proto = ports.proto;
                    r.five_tuple.dport = ports.dport;
                    r.five_tuple.sport =
                        static_cast<uint16_t>(49152 + rng.uniform_below(16000));
                    r.five_tuple.src = "10.0." + std::to_string(h) + "." +
                                       std::to_string(rng.uniform_below(250));
                    r.five_tuple.dst = "52." + std::to_string(c) + ".0.1";
                    r.label = class_name(c);
                    out << flow_csv_row(r, true) << '\n';
                }
            }
        }
    }
}

}  // namespace flowsel
