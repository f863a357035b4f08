#include "hpcd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "hpcd/error.hpp"

namespace hpcd {

void validate(const DetectorConfig& config) {
  if (config.window < 1)
    throw Error(ErrorCode::InvalidConfig, "detector window must be positive");
  if (!std::isfinite(config.alert_threshold) ||
      config.alert_threshold <= 0.5 || config.alert_threshold > 1.0)
    throw Error(ErrorCode::InvalidConfig,
                "alert threshold must lie in (0.5, 1] so only one class can "
                "hold a qualifying majority");
  if (config.cooldown_ms < 0)
    throw Error(ErrorCode::InvalidConfig, "cooldown must be non-negative");
}

ProjectionPlan make_projection(const std::vector<std::string>& stream_features,
                               const std::vector<std::string>& wanted) {
  ProjectionPlan plan;
  plan.indices.reserve(wanted.size());
  for (const std::string& name : wanted) {
    const auto it =
        std::find(stream_features.begin(), stream_features.end(), name);
    if (it == stream_features.end())
      throw Error(ErrorCode::MissingFeature,
                  "stream does not provide feature '" + name + "'");
    plan.indices.push_back(
        static_cast<std::size_t>(it - stream_features.begin()));
  }
  return plan;
}

std::vector<double> project_values(const Sample& sample,
                                   const ProjectionPlan& plan) {
  std::vector<double> values(plan.indices.size());
  for (std::size_t f = 0; f < plan.indices.size(); ++f) {
    if (plan.indices[f] >= sample.values.size())
      throw Error(ErrorCode::InconsistentWidth,
                  "sample is narrower than the stream header it came from");
    values[f] = static_cast<double>(sample.values[plan.indices[f]]);
  }
  return values;
}

DetectorEngine::DetectorEngine(const TrainedModel& model,
                               const DetectorConfig& config)
    : model_(&model), config_(config) {
  validate(config_);
}

DetectionVerdict DetectorEngine::ingest(std::int64_t pid,
                                        std::int64_t timestamp_ms,
                                        const std::vector<double>& values) {
  const ClassLabel pred = predict(*model_, values);
  PidState& st = pids_[pid];
  st.window.push_back(static_cast<int>(pred));
  ++st.votes[static_cast<std::size_t>(static_cast<int>(pred))];
  if (st.window.size() > static_cast<std::size_t>(config_.window)) {
    --st.votes[static_cast<std::size_t>(st.window.front())];
    st.window.pop_front();
  }

  DetectionVerdict verdict;
  verdict.pid = pid;
  verdict.timestamp_ms = timestamp_ms;
  verdict.predicted = pred;
  const auto w = static_cast<double>(config_.window);
  for (int k = 0; k < kNumClasses; ++k)
    verdict.vote_fraction[static_cast<std::size_t>(k)] =
        static_cast<double>(st.votes[static_cast<std::size_t>(k)]) / w;

  // threshold > 0.5 means at most one attack class can qualify.
  int best = 1;
  for (int k = 2; k < kNumClasses; ++k)
    if (st.votes[static_cast<std::size_t>(k)] >
        st.votes[static_cast<std::size_t>(best)])
      best = k;
  const auto bi = static_cast<std::size_t>(best);
  const double fraction = verdict.vote_fraction[bi];
  const bool cooling = st.cooling[bi] && timestamp_ms < st.cooldown_until[bi];
  if (fraction > config_.alert_threshold && !cooling) {
    verdict.alert = Alert{class_from_int(best), fraction};
    st.cooling[bi] = true;
    st.cooldown_until[bi] = timestamp_ms + config_.cooldown_ms;
    ++alerts_;
  }
  return verdict;
}

DetectionVerdict DetectorEngine::ingest(const Sample& sample) {
  std::vector<double> values(sample.values.begin(), sample.values.end());
  return ingest(sample.pid, sample.timestamp_ms, values);
}

void DetectorEngine::forget(std::int64_t pid) { pids_.erase(pid); }

DetectorRunSummary run_detector(
    const TrainedModel& model,
    std::vector<std::unique_ptr<SampleStream>> streams,
    const DetectorConfig& config,
    const std::function<void(const DetectionVerdict&)>& on_verdict) {
  DetectorEngine engine(model, config);
  DetectorRunSummary summary;

  struct Slot {
    std::unique_ptr<SampleStream> stream;
    ProjectionPlan plan;
    std::set<std::int64_t> pids;
    bool active = true;
  };
  std::vector<Slot> slots;
  slots.reserve(streams.size());
  for (auto& s : streams) {
    Slot slot;
    slot.plan = make_projection(s->feature_names(), model.feature_names);
    slot.stream = std::move(s);
    slots.push_back(std::move(slot));
  }

  std::size_t active = slots.size();
  while (active > 0) {
    for (Slot& slot : slots) {
      if (!slot.active) continue;
      try {
        const std::optional<Sample> sample = slot.stream->next();
        if (!sample) {
          slot.active = false;
          --active;
          continue;
        }
        const std::vector<double> values = project_values(*sample, slot.plan);
        DetectionVerdict verdict =
            engine.ingest(sample->pid, sample->timestamp_ms, values);
        verdict.stream_dropped = slot.stream->dropped();
        ++summary.samples;
        if (verdict.alert) ++summary.alerts;
        slot.pids.insert(sample->pid);
        if (on_verdict) on_verdict(verdict);
      } catch (const Error& e) {
        // Detach just this stream; the remaining processes stay monitored.
        summary.stream_errors.emplace_back(e.what());
        for (std::int64_t pid : slot.pids) engine.forget(pid);
        slot.active = false;
        --active;
      }
    }
  }
  for (const Slot& slot : slots) summary.dropped += slot.stream->dropped();
  return summary;
}

}  // namespace hpcd
