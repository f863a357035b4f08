#ifndef HPCD_DETECTOR_HPP_
#define HPCD_DETECTOR_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hpcd/learners.hpp"
#include "hpcd/sample.hpp"

namespace hpcd {

struct DetectorConfig {
  int window = 50;
  // Fraction of the window one attack class must exceed (strictly) to
  // alert. Must satisfy 0.5 < threshold <= 1 so at most one class can
  // qualify per window.
  double alert_threshold = 0.6;
  std::int64_t cooldown_ms = 5000;  // per (pid, class), on sample timestamps
};

/// Throws Error{InvalidConfig} on a non-positive window, a threshold outside
/// (0.5, 1], or a negative cooldown.
void validate(const DetectorConfig& config);

struct Alert {
  ClassLabel attack_class = ClassLabel::Benign;
  double confidence = 0.0;  // the winning class's vote fraction
};

struct DetectionVerdict {
  std::int64_t pid = 0;
  std::int64_t timestamp_ms = 0;
  ClassLabel predicted = ClassLabel::Benign;
  // Votes per class over the trailing window, divided by the configured
  // window length even while the window is still filling.
  std::array<double, kNumClasses> vote_fraction{};
  std::optional<Alert> alert;
  std::uint64_t stream_dropped = 0;  // source stream's cumulative drop count
};

/// Reorders a sample's values into the model's feature order.
struct ProjectionPlan {
  std::vector<std::size_t> indices;
};

/// Throws Error{MissingFeature} when a wanted feature is not in the stream
/// header.
ProjectionPlan make_projection(const std::vector<std::string>& stream_features,
                               const std::vector<std::string>& wanted);

std::vector<double> project_values(const Sample& sample,
                                   const ProjectionPlan& plan);

/// Majority-vote smoother over per-sample predictions, tracked per process.
/// Cooldown windows run on sample timestamps, so replayed traces behave
/// exactly like live capture.
class DetectorEngine {
 public:
  DetectorEngine(const TrainedModel& model, const DetectorConfig& config);

  /// values must be in model feature order. Cooldown comparisons assume
  /// non-decreasing timestamps per pid.
  DetectionVerdict ingest(std::int64_t pid, std::int64_t timestamp_ms,
                          const std::vector<double>& values);
  DetectionVerdict ingest(const Sample& sample);

  const DetectorConfig& config() const { return config_; }
  std::uint64_t alerts() const { return alerts_; }

  /// Drops all window and cooldown state for a process that went away.
  void forget(std::int64_t pid);

 private:
  struct PidState {
    std::deque<int> window;
    std::array<int, kNumClasses> votes{};
    std::array<std::int64_t, kNumClasses> cooldown_until{};
    std::array<bool, kNumClasses> cooling{};
  };

  const TrainedModel* model_;
  DetectorConfig config_;
  std::unordered_map<std::int64_t, PidState> pids_;
  std::uint64_t alerts_ = 0;
};

struct DetectorRunSummary {
  std::uint64_t samples = 0;
  std::uint64_t alerts = 0;
  std::uint64_t dropped = 0;  // summed stream drop counters
  std::vector<std::string> stream_errors;
};

/// Drains the streams round-robin, projecting each sample into the model
/// schema and feeding the engine. A stream that throws is detached (its
/// error recorded, its process state forgotten) while the others keep
/// running. on_verdict may be empty.
DetectorRunSummary run_detector(
    const TrainedModel& model,
    std::vector<std::unique_ptr<SampleStream>> streams,
    const DetectorConfig& config,
    const std::function<void(const DetectionVerdict&)>& on_verdict);

}  // namespace hpcd

#endif  // HPCD_DETECTOR_HPP_
