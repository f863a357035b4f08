#ifndef HPCD_REPLAY_HPP_
#define HPCD_REPLAY_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hpcd/dataset.hpp"

namespace hpcd {

enum class ReplaySpeed {
  kRealtime,
  kUnthrottled,
};

/// Yields a recorded trace in file order. Realtime mode sleeps to honor
/// inter-row timestamp gaps; unthrottled mode ignores timestamps entirely.
/// When expected_features is given, a header mismatch is a MalformedTrace
/// error at open time.
std::unique_ptr<SampleStream> open_replay(
    const std::string& path, ReplaySpeed speed,
    const std::optional<std::vector<std::string>>& expected_features =
        std::nullopt);

/// In-memory variant used by tests and the detector.
std::unique_ptr<SampleStream> replay_dataset(Dataset dataset,
                                             ReplaySpeed speed);

}  // namespace hpcd

#endif  // HPCD_REPLAY_HPP_
