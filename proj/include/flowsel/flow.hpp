#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace flowsel {

constexpr uint8_t kProtoTcp = 6;
constexpr uint8_t kProtoUdp = 17;

// Number of per-direction activity features.
constexpr size_t kDirectionFeatureCount = 11;
// 22 activity features (forward block then reverse block) + 6 service bits.
constexpr size_t kFeatureCount = 2 * kDirectionFeatureCount + 6;

// Per-direction counters of one bidirectional flow record. Counts and byte
// totals are integral; the time/deviation statistics are real-valued.
struct DirectionStats {
    uint64_t packet_total_count = 0;
    uint64_t octet_total_count = 0;
    uint64_t small_packet_count = 0;      // payload < 60 bytes (zero payload included)
    uint64_t large_packet_count = 0;      // payload >= 220 bytes
    uint64_t non_empty_packet_count = 0;
    uint64_t data_byte_count = 0;         // total payload bytes
    double average_interarrival_time = 0; // ms between consecutive packets
    uint64_t first_non_empty_packet_size = 0;
    uint64_t max_packet_size = 0;         // largest payload
    double std_payload_length = 0;        // population std, first <=10 non-empty packets
    double std_interarrival_time = 0;     // population std, gaps among first <=10 packets

    // Throws InvariantViolation when the counters are inconsistent.
    void validate() const;
};

// Builds DirectionStats from raw per-packet observations; used by tests and
// by tooling that sees packets rather than finished records. Payload sizes in
// bytes, arrival times in ms, both in packet order. Statistics over empty or
// singleton sets are 0. When the on-wire octet total is unknown the payload
// total is used.
DirectionStats direction_from_packets(std::span<const uint64_t> payload_bytes,
                                      std::span<const double> arrival_ms,
                                      std::optional<uint64_t> octet_total = std::nullopt);

struct FiveTuple {
    std::string src;
    std::string dst;
    std::optional<uint16_t> sport;  // present only for TCP/UDP
    std::optional<uint16_t> dport;
    uint8_t proto = 0;              // IP protocol number, 1..255
};

// One bidirectional five-tuple flow observed in one home on one day.
// Immutable after construction; safe to share across threads.
struct FlowRecord {
    std::string home_id;
    int epoch_day = 0;
    FiveTuple five_tuple;
    DirectionStats fwd;  // initiator -> responder
    DirectionStats rev;
    std::optional<std::string> label;  // true device class, when known
};

// The 28-dimensional classifier input. Layout is a file-format contract:
// indices [0,11) forward activity features, [11,22) reverse, [22,28)
// service bits in the order http, tls, dns, ntp, other_tcp, other_udp.
struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](size_t i) const { return values[i]; }
    bool operator==(const FeatureVector&) const = default;
};

enum ServiceBit : size_t {
    kServiceHttp = 0,
    kServiceTls = 1,
    kServiceDns = 2,
    kServiceNtp = 3,
    kServiceOtherTcp = 4,
    kServiceOtherUdp = 5,
};

// Port-based service classification (destination port of the forward
// direction). Exactly one bit is set for TCP/UDP, none otherwise.
std::array<double, 6> classify_service(uint8_t proto, std::optional<uint16_t> dst_port);

// Copies the per-direction counters into the fixed feature layout and fills
// the service bits. Validates both directions first.
FeatureVector extract_features(const FlowRecord& record);

// Column base names of the 11 per-direction features, in layout order.
std::span<const char* const> direction_feature_names();

}  // namespace flowsel
