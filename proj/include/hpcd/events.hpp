#ifndef HPCD_EVENTS_HPP_
#define HPCD_EVENTS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpcd {

enum class EventCategory { HARDWARE, SOFTWARE, HW_CACHE };

constexpr std::string_view category_name(EventCategory c) {
  switch (c) {
    case EventCategory::HARDWARE: return "HARDWARE";
    case EventCategory::SOFTWARE: return "SOFTWARE";
    case EventCategory::HW_CACHE: return "HW_CACHE";
  }
  return "UNKNOWN";
}

/// One countable performance event. `catalog_id` is stable and unique
/// (1..30); `name` is the canonical short form used in trace headers.
struct EventSpec {
  std::string name;
  EventCategory category;
  int catalog_id;
};

/// Full event catalog: 8 hardware, 4 software, 18 cache events, in
/// catalog_id order.
const std::vector<EventSpec>& catalog();

/// Lookup by canonical name; nullopt when unknown.
std::optional<EventSpec> find_event(std::string_view name);

/// catalog_id for a known feature name, or fallback when the name is not a
/// catalog event (used for deterministic tie-breaking).
int catalog_id_or(std::string_view name, int fallback);

enum class ClassLabel : int {
  Benign = 0,
  SpectreV1 = 1,
  SpectreV2 = 2,
  Meltdown = 3,
  SpectreV4 = 4,
};

inline constexpr int kNumClasses = 5;

constexpr std::string_view class_name(ClassLabel label) {
  switch (label) {
    case ClassLabel::Benign: return "benign";
    case ClassLabel::SpectreV1: return "spectre_v1";
    case ClassLabel::SpectreV2: return "spectre_v2";
    case ClassLabel::Meltdown: return "meltdown";
    case ClassLabel::SpectreV4: return "spectre_v4";
  }
  return "unknown";
}

/// Parses a 0..4 label value; throws Error{MalformedTrace} otherwise.
ClassLabel class_from_int(int value);

}  // namespace hpcd

#endif  // HPCD_EVENTS_HPP_
