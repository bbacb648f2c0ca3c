#include "flowsel/flow.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flowsel/errors.hpp"

namespace flowsel {

namespace {

constexpr std::array<const char*, kDirectionFeatureCount> kDirectionNames = {
    "packet_total_count",
    "octet_total_count",
    "small_packet_count",
    "large_packet_count",
    "non_empty_packet_count",
    "data_byte_count",
    "average_interarrival_time",
    "first_non_empty_packet_size",
    "max_packet_size",
    "std_payload_length",
    "std_interarrival_time",
};

double population_std(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

void write_direction(const DirectionStats& d, double* out) {
    out[0] = static_cast<double>(d.packet_total_count);
    out[1] = static_cast<double>(d.octet_total_count);
    out[2] = static_cast<double>(d.small_packet_count);
    out[3] = static_cast<double>(d.large_packet_count);
    out[4] = static_cast<double>(d.non_empty_packet_count);
    out[5] = static_cast<double>(d.data_byte_count);
    out[6] = d.average_interarrival_time;
    out[7] = static_cast<double>(d.first_non_empty_packet_size);
    out[8] = static_cast<double>(d.max_packet_size);
    out[9] = d.std_payload_length;
    out[10] = d.std_interarrival_time;
}

}  // namespace

void DirectionStats::validate() const {
    if (small_packet_count + large_packet_count > packet_total_count)
        throw InvariantViolation("small+large packet counts exceed packet total");
    if (non_empty_packet_count > packet_total_count)
        throw InvariantViolation("non-empty packet count exceeds packet total");
    if (non_empty_packet_count >= 1 && data_byte_count < first_non_empty_packet_size)
        throw InvariantViolation("data byte count below first non-empty packet size");
    if (average_interarrival_time < 0 || std_payload_length < 0 || std_interarrival_time < 0)
        throw InvariantViolation("negative time statistic");
}

DirectionStats direction_from_packets(std::span<const uint64_t> payload_bytes,
                                      std::span<const double> arrival_ms,
                                      std::optional<uint64_t> octet_total) {
    DirectionStats d;
    d.packet_total_count = payload_bytes.size();
    std::vector<double> payloads_first10;
    bool seen_non_empty = false;
    for (uint64_t p : payload_bytes) {
        if (p < 60) ++d.small_packet_count;
        if (p >= 220) ++d.large_packet_count;
        if (p > 0) {
            ++d.non_empty_packet_count;
            d.data_byte_count += p;
            if (!seen_non_empty) {
                d.first_non_empty_packet_size = p;
                seen_non_empty = true;
            }
            if (payloads_first10.size() < 10)
                payloads_first10.push_back(static_cast<double>(p));
        }
        d.max_packet_size = std::max(d.max_packet_size, p);
    }
    d.octet_total_count = octet_total.value_or(d.data_byte_count);

    std::vector<double> gaps;
    for (size_t i = 1; i < arrival_ms.size(); ++i)
        gaps.push_back(arrival_ms[i] - arrival_ms[i - 1]);
    if (!gaps.empty()) {
        double sum = 0.0;
        for (double g : gaps) sum += g;
        d.average_interarrival_time = sum / static_cast<double>(gaps.size());
    }
    // Deviation of gaps among the first up-to-10 packets, i.e. up to 9 gaps.
    std::span<const double> gaps10(gaps.data(), std::min<size_t>(gaps.size(), 9));
    d.std_interarrival_time = population_std(gaps10);
    d.std_payload_length = population_std(payloads_first10);
    return d;
}

std::array<double, 6> classify_service(uint8_t proto, std::optional<uint16_t> dst_port) {
    std::array<double, 6> bits{};
    if (proto != kProtoTcp && proto != kProtoUdp) return bits;
    const uint16_t port = dst_port.value_or(0);
    if (proto == kProtoTcp) {
        if (port == 80 || port == 8080 || port == 8008 || port == 8888)
            bits[kServiceHttp] = 1;
        else if (port == 443 || port == 1443 || port == 8443 || port == 55443)
            bits[kServiceTls] = 1;
        else
            bits[kServiceOtherTcp] = 1;
    } else {
        if (port == 53 || port == 5353)
            bits[kServiceDns] = 1;
        else if (port == 123)
            bits[kServiceNtp] = 1;
        else
            bits[kServiceOtherUdp] = 1;
    }
    return bits;
}

FeatureVector extract_features(const FlowRecord& record) {
    record.fwd.validate();
    record.rev.validate();
    FeatureVector f;
    write_direction(record.fwd, f.values.data());
    write_direction(record.rev, f.values.data() + kDirectionFeatureCount);
    const auto bits = classify_service(record.five_tuple.proto, record.five_tuple.dport);
    std::copy(bits.begin(), bits.end(), f.values.begin() + 2 * kDirectionFeatureCount);
    return f;
}

std::span<const char* const> direction_feature_names() {
    return {kDirectionNames.data(), kDirectionNames.size()};
}

}  // namespace flowsel
