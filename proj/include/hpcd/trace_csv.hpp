#ifndef HPCD_TRACE_CSV_HPP_
#define HPCD_TRACE_CSV_HPP_

#include <iosfwd>
#include <string>

#include "hpcd/dataset.hpp"

namespace hpcd {

/// Trace file layout:
///   timestamp_ms,pid,label,<event_name_1>,...,<event_name_k>
/// one row per sampling interval, label one of 0..4 or empty, counter
/// values unsigned 64-bit decimal, UTF-8 with LF line endings.
///
/// Errors: MissingHeader (empty input or header not starting with the three
/// fixed columns), MalformedTrace (bad field, with line number and reason),
/// InconsistentWidth (row field count differs from header).
Dataset read_trace_csv(std::istream& in);
Dataset read_trace_csv_file(const std::string& path);

void write_trace_csv(std::ostream& out, const Dataset& dataset);
void write_trace_csv_file(const std::string& path, const Dataset& dataset);

}  // namespace hpcd

#endif  // HPCD_TRACE_CSV_HPP_
