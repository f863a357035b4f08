#include "hpcd/sample.hpp"

#include "hpcd/error.hpp"

namespace hpcd {

void validate(const SamplingConfig& config) {
  if (config.interval_ms < 1) {
    throw Error(ErrorCode::InvalidConfig, "interval must be >= 1 ms");
  }
  if (config.events.empty() || config.events.size() > 8) {
    throw Error(ErrorCode::InvalidConfig,
                "event list length must be 1..8, got " +
                    std::to_string(config.events.size()));
  }
  if (config.max_group_size < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_group_size must be >= 1");
  }
}

std::vector<std::vector<EventSpec>> schedule_groups(
    const std::vector<EventSpec>& events, int max_group_size) {
  if (max_group_size < 1) {
    throw Error(ErrorCode::InvalidConfig, "max_group_size must be >= 1");
  }
  std::vector<std::vector<EventSpec>> groups;
  for (const auto& event : events) {
    if (groups.empty() ||
        groups.back().size() >= static_cast<std::size_t>(max_group_size)) {
      groups.emplace_back();
    }
    groups.back().push_back(event);
  }
  return groups;
}

}  // namespace hpcd
