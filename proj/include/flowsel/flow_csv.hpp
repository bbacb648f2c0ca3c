#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "flowsel/flow.hpp"

namespace flowsel {

// Flow CSV column contract. Header is fixed:
//   home_id,epoch_day,src,dst,sport,dport,proto,
//   fwd_<field>... (11 columns), rev_<field>... (11 columns) [,label]
// UTF-8, comma separated, '.' decimal point, no thousands separators.
// sport/dport are empty unless proto is TCP(6) or UDP(17). The label column
// is optional as a whole; when present, empty cells mean "label unknown".
// Unknown or reordered columns are a SchemaError, not silently ignored.

// Header line, with or without the trailing label column.
std::string flow_csv_header(bool with_label);

// Streams records in file order through `sink`. Throws SchemaError on a
// header mismatch and ParseError (with the 1-based line number) on malformed
// rows. This is the strict, single-pass parser; multiple files may be
// parsed concurrently.
void for_each_flow(const std::string& path,
                   const std::function<void(FlowRecord&&)>& sink);

std::vector<FlowRecord> read_flow_csv(const std::string& path);

void write_flow_csv(const std::string& path, const std::vector<FlowRecord>& records,
                    bool with_label);

// Serializes one record as a CSV row (no newline). Numbers are written with
// shortest round-trip formatting, so write/read is lossless.
std::string flow_csv_row(const FlowRecord& record, bool with_label);

}  // namespace flowsel
