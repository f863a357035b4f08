#include "hpcd/synth.hpp"

#include <cmath>
#include <unordered_set>

#include "hpcd/error.hpp"
#include "hpcd/rng.hpp"

namespace hpcd {

const char* dist_family_name(DistFamily family) {
  switch (family) {
    case DistFamily::kLognormal:
      return "lognormal";
    case DistFamily::kGaussianTruncatedAtZero:
      return "gaussian-truncated-at-zero";
  }
  return "unknown";
}

DistFamily dist_family_from_name(const std::string& name) {
  if (name == "lognormal") return DistFamily::kLognormal;
  if (name == "gaussian-truncated-at-zero") {
    return DistFamily::kGaussianTruncatedAtZero;
  }
  throw Error(ErrorCode::InvalidProfile, "unknown distribution family: " + name);
}

void validate_profile(const ScenarioProfile& profile) {
  if (profile.name.empty()) {
    throw Error(ErrorCode::InvalidProfile, "profile without a name");
  }
  if (profile.features.empty()) {
    throw Error(ErrorCode::InvalidProfile,
                "profile " + profile.name + " emits no features");
  }
  std::unordered_set<std::string> seen;
  for (const auto& dist : profile.features) {
    if (dist.feature.empty()) {
      throw Error(ErrorCode::InvalidProfile,
                  "profile " + profile.name + " has an unnamed feature");
    }
    if (!seen.insert(dist.feature).second) {
      throw Error(ErrorCode::InvalidProfile,
                  "profile " + profile.name + " names " + dist.feature +
                      " twice");
    }
    if (!std::isfinite(dist.location) || !std::isfinite(dist.scale)) {
      throw Error(ErrorCode::InvalidProfile,
                  "profile " + profile.name + ", feature " + dist.feature +
                      ": non-finite parameter");
    }
    if (dist.scale < 0.0) {
      throw Error(ErrorCode::InvalidProfile,
                  "profile " + profile.name + ", feature " + dist.feature +
                      ": negative scale");
    }
    if (dist.family == DistFamily::kLognormal && dist.location <= 0.0) {
      throw Error(ErrorCode::InvalidProfile,
                  "profile " + profile.name + ", feature " + dist.feature +
                      ": lognormal location must be positive");
    }
  }
}

namespace {

std::uint64_t draw_value(const FeatureDist& dist, Rng& rng) {
  double x = 0.0;
  switch (dist.family) {
    case DistFamily::kLognormal:
      x = dist.location * std::exp(dist.scale * rng.normal(0.0, 1.0));
      break;
    case DistFamily::kGaussianTruncatedAtZero:
      x = dist.location + dist.scale * rng.normal(0.0, 1.0);
      if (x < 0.0) x = 0.0;
      break;
  }
  if (x < 0.0) x = 0.0;
  return static_cast<std::uint64_t>(std::llround(x));
}

}  // namespace

std::int64_t profile_pid(const ScenarioProfile& profile) {
  // FNV-1a over the name, folded into a plausible pid range.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : profile.name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<std::int64_t>(1000 + (h % 60000));
}

Dataset generate_with_seed(const ScenarioProfile& profile, std::size_t n,
                           std::uint64_t seed, std::int64_t pid,
                           std::int64_t start_timestamp_ms) {
  validate_profile(profile);
  if (n == 0) {
    throw Error(ErrorCode::InvalidConfig, "cannot generate an empty trace");
  }
  Dataset out;
  out.feature_names.reserve(profile.features.size());
  for (const auto& dist : profile.features) {
    out.feature_names.push_back(dist.feature);
  }
  Rng rng(seed);
  out.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.timestamp_ms = start_timestamp_ms + static_cast<std::int64_t>(i);
    s.pid = pid;
    s.label = profile.label;
    s.values.reserve(profile.features.size());
    for (const auto& dist : profile.features) {
      s.values.push_back(draw_value(dist, rng));
    }
    out.rows.push_back(std::move(s));
  }
  return out;
}

Dataset generate(const ScenarioProfile& profile, std::size_t n) {
  return generate_with_seed(profile, n, profile.seed, profile_pid(profile));
}

}  // namespace hpcd
