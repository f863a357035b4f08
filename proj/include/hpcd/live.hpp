#ifndef HPCD_LIVE_HPP_
#define HPCD_LIVE_HPP_

#include <memory>

#include "hpcd/sample.hpp"

namespace hpcd {

/// Environment override for SamplingConfig.interval_ms, checked by
/// open_live before the config is applied.
inline constexpr const char* kIntervalEnvVar = "HPCDETECT_INTERVAL_MS";

/// Attaches per-process kernel counters and yields one delta Sample per
/// interval. Events are scheduled into groups of at most
/// config.max_group_size; multiplexed groups are scaled by the kernel's
/// enabled/running time ratio. The first tick is the baseline and produces
/// no Sample. Builds without kernel counter support throw
/// PlatformUnsupported.
std::unique_ptr<SampleStream> open_live(const SamplingConfig& config);

bool live_supported();

}  // namespace hpcd

#endif  // HPCD_LIVE_HPP_
