#include "flowsel/flow_csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "flowsel/errors.hpp"

namespace flowsel {

namespace {

std::string build_header(bool with_label) {
    std::string h = "home_id,epoch_day,src,dst,sport,dport,proto";
    for (const char* prefix : {"fwd_", "rev_"})
        for (const char* name : direction_feature_names()) {
            h += ',';
            h += prefix;
            h += name;
        }
    if (with_label) h += ",label";
    return h;
}

void split_fields(const std::string& line, std::vector<std::string_view>& out) {
    out.clear();
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.emplace_back(line.data() + start, line.size() - start);
            return;
        }
        out.emplace_back(line.data() + start, comma - start);
        start = comma + 1;
    }
}

template <typename T>
T parse_number(std::string_view field, const char* what, size_t line_no) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError(std::string("malformed ") + what + " '" + std::string(field) + "'",
                         line_no);
    return value;
}

void parse_direction(const std::vector<std::string_view>& f, size_t base,
                     DirectionStats& d, size_t line_no) {
    d.packet_total_count = parse_number<uint64_t>(f[base + 0], "packet_total_count", line_no);
    d.octet_total_count = parse_number<uint64_t>(f[base + 1], "octet_total_count", line_no);
    d.small_packet_count = parse_number<uint64_t>(f[base + 2], "small_packet_count", line_no);
    d.large_packet_count = parse_number<uint64_t>(f[base + 3], "large_packet_count", line_no);
    d.non_empty_packet_count =
        parse_number<uint64_t>(f[base + 4], "non_empty_packet_count", line_no);
    d.data_byte_count = parse_number<uint64_t>(f[base + 5], "data_byte_count", line_no);
    d.average_interarrival_time =
        parse_number<double>(f[base + 6], "average_interarrival_time", line_no);
    d.first_non_empty_packet_size =
        parse_number<uint64_t>(f[base + 7], "first_non_empty_packet_size", line_no);
    d.max_packet_size = parse_number<uint64_t>(f[base + 8], "max_packet_size", line_no);
    d.std_payload_length = parse_number<double>(f[base + 9], "std_payload_length", line_no);
    d.std_interarrival_time =
        parse_number<double>(f[base + 10], "std_interarrival_time", line_no);
}

void append_number(std::string& out, uint64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, ptr);
}

void append_number(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    out.append(buf, ptr);
}

void append_direction(std::string& out, const DirectionStats& d) {
    out += ',';
    append_number(out, d.packet_total_count);
    out += ',';
    append_number(out, d.octet_total_count);
    out += ',';
    append_number(out, d.small_packet_count);
    out += ',';
    append_number(out, d.large_packet_count);
    out += ',';
    append_number(out, d.non_empty_packet_count);
    out += ',';
    append_number(out, d.data_byte_count);
    out += ',';
    append_number(out, d.average_interarrival_time);
    out += ',';
    append_number(out, d.first_non_empty_packet_size);
    out += ',';
    append_number(out, d.max_packet_size);
    out += ',';
    append_number(out, d.std_payload_length);
    out += ',';
    append_number(out, d.std_interarrival_time);
}

}  // namespace

std::string flow_csv_header(bool with_label) { return build_header(with_label); }

void for_each_flow(const std::string& path,
                   const std::function<void(FlowRecord&&)>& sink) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open flow file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty flow file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    bool with_label;
    if (line == build_header(true)) {
        with_label = true;
    } else if (line == build_header(false)) {
        with_label = false;
    } else {
        throw SchemaError("flow CSV header mismatch in " + path);
    }
    const size_t n_fields = 7 + 2 * kDirectionFeatureCount + (with_label ? 1 : 0);

    std::vector<std::string_view> fields;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        split_fields(line, fields);
        if (fields.size() != n_fields)
            throw ParseError("expected " + std::to_string(n_fields) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);

        FlowRecord r;
        r.home_id = std::string(fields[0]);
        if (r.home_id.empty()) throw ParseError("empty home_id", line_no);
        r.epoch_day = parse_number<int>(fields[1], "epoch_day", line_no);
        if (r.epoch_day < 0) throw ParseError("negative epoch_day", line_no);
        r.five_tuple.src = std::string(fields[2]);
        r.five_tuple.dst = std::string(fields[3]);
        const uint32_t proto = parse_number<uint32_t>(fields[6], "proto", line_no);
        if (proto < 1 || proto > 255) throw ParseError("proto out of range 1..255", line_no);
        r.five_tuple.proto = static_cast<uint8_t>(proto);

        const bool ports_expected = proto == kProtoTcp || proto == kProtoUdp;
        for (int p = 0; p < 2; ++p) {
            const auto field = fields[4 + p];
            auto& slot = p == 0 ? r.five_tuple.sport : r.five_tuple.dport;
            if (field.empty()) {
                if (ports_expected)
                    throw ParseError(p == 0 ? "missing sport for TCP/UDP flow"
                                            : "missing dport for TCP/UDP flow",
                                     line_no);
            } else {
                if (!ports_expected)
                    throw ParseError("port given for non-TCP/UDP flow", line_no);
                slot = parse_number<uint16_t>(field, p == 0 ? "sport" : "dport", line_no);
            }
        }

        parse_direction(fields, 7, r.fwd, line_no);
        parse_direction(fields, 7 + kDirectionFeatureCount, r.rev, line_no);

        if (with_label && !fields.back().empty()) r.label = std::string(fields.back());

        sink(std::move(r));
    }
}

std::vector<FlowRecord> read_flow_csv(const std::string& path) {
    std::vector<FlowRecord> out;
    for_each_flow(path, [&](FlowRecord&& r) { out.push_back(std::move(r)); });
    return out;
}

std::string flow_csv_row(const FlowRecord& r, bool with_label) {
    std::string out = r.home_id;
    out += ',';
    append_number(out, static_cast<uint64_t>(r.epoch_day));
    out += ',';
    out += r.five_tuple.src;
    out += ',';
    out += r.five_tuple.dst;
    out += ',';
    if (r.five_tuple.sport) append_number(out, static_cast<uint64_t>(*r.five_tuple.sport));
    out += ',';
    if (r.five_tuple.dport) append_number(out, static_cast<uint64_t>(*r.five_tuple.dport));
    out += ',';
    append_number(out, static_cast<uint64_t>(r.five_tuple.proto));
    append_direction(out, r.fwd);
    append_direction(out, r.rev);
    if (with_label) {
        out += ',';
        if (r.label) out += *r.label;
    }
    return out;
}

void write_flow_csv(const std::string& path, const std::vector<FlowRecord>& records,
                    bool with_label) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write flow file: " + path);
    out << build_header(with_label) << '\n';
    for (const auto& r : records) out << flow_csv_row(r, with_label) << '\n';
}

}  // namespace flowsel
