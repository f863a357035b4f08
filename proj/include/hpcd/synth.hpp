#ifndef HPCD_SYNTH_HPP_
#define HPCD_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hpcd/dataset.hpp"

namespace hpcd {

enum class DistFamily {
  kLognormal,
  kGaussianTruncatedAtZero,
};

const char* dist_family_name(DistFamily family);
DistFamily dist_family_from_name(const std::string& name);

/// location is in raw counter units for both families: the median of the
/// lognormal (scale = sigma of the log), the pre-truncation mean of the
/// gaussian (scale = stddev). scale 0 degenerates to the location point.
struct FeatureDist {
  std::string feature;
  DistFamily family = DistFamily::kGaussianTruncatedAtZero;
  double location = 0.0;
  double scale = 0.0;

  bool operator==(const FeatureDist&) const = default;
};

struct ScenarioProfile {
  std::string name;
  ClassLabel label = ClassLabel::Benign;
  std::vector<FeatureDist> features;
  std::uint64_t seed = 0;

  bool operator==(const ScenarioProfile&) const = default;
};

/// Throws Error{InvalidProfile} on unknown family, negative or non-finite
/// scale, non-finite or (lognormal) non-positive location, empty or
/// duplicate feature names.
void validate_profile(const ScenarioProfile& profile);

/// n labeled rows drawn i.i.d. from the profile's distributions using the
/// profile's own seed. Timestamps advance 1 ms per row from 0; pid is
/// derived from the profile name so distinct scenarios never collide.
Dataset generate(const ScenarioProfile& profile, std::size_t n);

/// Same draw with an explicit seed/pid/epoch, for corpus assembly.
Dataset generate_with_seed(const ScenarioProfile& profile, std::size_t n,
                           std::uint64_t seed, std::int64_t pid,
                           std::int64_t start_timestamp_ms = 0);

std::int64_t profile_pid(const ScenarioProfile& profile);

}  // namespace hpcd

#endif  // HPCD_SYNTH_HPP_
