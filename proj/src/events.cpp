#include "hpcd/events.hpp"

#include "hpcd/error.hpp"

namespace hpcd {

namespace {

std::vector<EventSpec> build_catalog() {
  using C = EventCategory;
  // Ids 1..8 hardware, 9..12 software, 13..30 cache. Id 8 is the branch
  // instruction counter, completing the hardware block alongside
  // BRANCH_MISSES.
  return {
      {"CACHE_REFERENCES", C::HARDWARE, 1},
      {"CACHE_MISSES", C::HARDWARE, 2},
      {"CPU_CYCLES", C::HARDWARE, 3},
      {"INSTRUCTIONS", C::HARDWARE, 4},
      {"BUS_CYCLES", C::HARDWARE, 5},
      {"REF_CPU_CYCLES", C::HARDWARE, 6},
      {"BRANCH_MISSES", C::HARDWARE, 7},
      {"BRANCH_INSTRUCTIONS", C::HARDWARE, 8},
      {"CPU_CLOCK", C::SOFTWARE, 9},
      {"TASK_CLOCK", C::SOFTWARE, 10},
      {"PAGE_FAULTS", C::SOFTWARE, 11},
      {"CONTEXT_SWITCHES", C::SOFTWARE, 12},
      {"L1D_READ", C::HW_CACHE, 13},
      {"L1D_WRITE", C::HW_CACHE, 14},
      {"L1D_ACCESS", C::HW_CACHE, 15},
      {"L1D_MISS", C::HW_CACHE, 16},
      {"L1I_MISS", C::HW_CACHE, 17},
      {"LL_READ", C::HW_CACHE, 18},
      {"LL_WRITE", C::HW_CACHE, 19},
      {"LL_ACCESS", C::HW_CACHE, 20},
      {"LL_MISS", C::HW_CACHE, 21},
      {"DTLB_READ", C::HW_CACHE, 22},
      {"DTLB_WRITE", C::HW_CACHE, 23},
      {"DTLB_ACCESS", C::HW_CACHE, 24},
      {"DTLB_MISS", C::HW_CACHE, 25},
      {"ITLB_ACCESS", C::HW_CACHE, 26},
      {"ITLB_MISS", C::HW_CACHE, 27},
      {"BPU_READ", C::HW_CACHE, 28},
      {"BPU_ACCESS", C::HW_CACHE, 29},
      {"BPU_MISS", C::HW_CACHE, 30},
  };
}

}  // namespace

const std::vector<EventSpec>& catalog() {
  static const std::vector<EventSpec> entries = build_catalog();
  return entries;
}

std::optional<EventSpec> find_event(std::string_view name) {
  for (const auto& spec : catalog()) {
    if (spec.name == name) return spec;
  }
  return std::nullopt;
}

int catalog_id_or(std::string_view name, int fallback) {
  auto spec = find_event(name);
  return spec ? spec->catalog_id : fallback;
}

ClassLabel class_from_int(int value) {
  if (value < 0 || value >= kNumClasses) {
    throw Error(ErrorCode::MalformedTrace,
                "label out of range: " + std::to_string(value));
  }
  return static_cast<ClassLabel>(value);
}

}  // namespace hpcd
