#ifndef HPCD_SAMPLE_HPP_
#define HPCD_SAMPLE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpcd/events.hpp"

namespace hpcd {

/// One per-process sampling interval: counter deltas for the configured
/// events, in the stream's feature order.
struct Sample {
  std::int64_t timestamp_ms = 0;
  std::int64_t pid = 0;
  std::vector<std::uint64_t> values;
  std::optional<ClassLabel> label;

  bool operator==(const Sample&) const = default;
};

struct SamplingConfig {
  std::int64_t interval_ms = 1;
  std::vector<EventSpec> events;
  std::int64_t pid = 0;
  int max_group_size = 4;
};

/// Validates SamplingConfig invariants; throws Error{InvalidConfig}.
void validate(const SamplingConfig& config);

/// Splits the configured event list into counter groups of at most
/// max_group_size, preserving order. Pure; exposed for testing the
/// scheduler's group assignment.
std::vector<std::vector<EventSpec>> schedule_groups(
    const std::vector<EventSpec>& events, int max_group_size);

/// Ordered source of Samples with a fixed feature schema. A stream is owned
/// by a single consumer; next() may be called from one thread.
class SampleStream {
 public:
  virtual ~SampleStream() = default;

  /// Next sample, or nullopt at end of stream.
  virtual std::optional<Sample> next() = 0;

  virtual const std::vector<std::string>& feature_names() const = 0;

  /// Samples dropped by the producer under backpressure (live sources only).
  virtual std::uint64_t dropped() const { return 0; }
};

}  // namespace hpcd

#endif  // HPCD_SAMPLE_HPP_
