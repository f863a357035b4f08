#include "hpcd/trace_csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "hpcd/error.hpp"

namespace hpcd {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& reason) {
  throw Error(ErrorCode::MalformedTrace,
              "line " + std::to_string(line_no) + ": " + reason);
}

template <typename T>
T parse_int(std::string_view field, std::size_t line_no, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    malformed(line_no, std::string("invalid ") + what + " '" +
                           std::string(field) + "'");
  }
  return value;
}

}  // namespace

Dataset read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MissingHeader, "empty trace input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  auto header = split_fields(line);
  if (header.size() < 4 || header[0] != "timestamp_ms" || header[1] != "pid" ||
      header[2] != "label") {
    throw Error(ErrorCode::MissingHeader,
                "header must start with timestamp_ms,pid,label and name at "
                "least one event");
  }

  Dataset dataset;
  dataset.feature_names.reserve(header.size() - 3);
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].empty()) {
      throw Error(ErrorCode::MissingHeader, "empty event name in header");
    }
    dataset.feature_names.emplace_back(header[i]);
  }

  const std::size_t expect = header.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    auto fields = split_fields(line);
    if (fields.size() != expect) {
      throw Error(ErrorCode::InconsistentWidth,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expect) + " fields, got " +
                      std::to_string(fields.size()));
    }

    Sample sample;
    sample.timestamp_ms = parse_int<std::int64_t>(fields[0], line_no, "timestamp");
    sample.pid = parse_int<std::int64_t>(fields[1], line_no, "pid");
    if (!fields[2].empty()) {
      int raw = parse_int<int>(fields[2], line_no, "label");
      if (raw < 0 || raw >= kNumClasses) {
        malformed(line_no, "label out of range '" + std::string(fields[2]) + "'");
      }
      sample.label = static_cast<ClassLabel>(raw);
    }
    sample.values.reserve(expect - 3);
    for (std::size_t i = 3; i < expect; ++i) {
      sample.values.push_back(
          parse_int<std::uint64_t>(fields[i], line_no, "counter value"));
    }
    dataset.rows.push_back(std::move(sample));
  }
  return dataset;
}

Dataset read_trace_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_trace_csv(in);
}

void write_trace_csv(std::ostream& out, const Dataset& dataset) {
  dataset.check_consistent();
  out << "timestamp_ms,pid,label";
  for (const auto& name : dataset.feature_names) out << ',' << name;
  out << '\n';
  for (const auto& row : dataset.rows) {
    out << row.timestamp_ms << ',' << row.pid << ',';
    if (row.label) out << static_cast<int>(*row.label);
    for (std::uint64_t v : row.values) out << ',' << v;
    out << '\n';
  }
}

void write_trace_csv_file(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  write_trace_csv(out, dataset);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace hpcd
