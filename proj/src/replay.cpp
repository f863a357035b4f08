#include "hpcd/replay.hpp"

#include <chrono>
#include <thread>

#include "hpcd/error.hpp"
#include "hpcd/trace_csv.hpp"

namespace hpcd {
namespace {

class ReplayStream final : public SampleStream {
 public:
  ReplayStream(Dataset dataset, ReplaySpeed speed)
      : dataset_(std::move(dataset)), speed_(speed) {
    dataset_.check_consistent();
  }

  std::optional<Sample> next() override {
    if (pos_ >= dataset_.rows.size()) return std::nullopt;
    const Sample& sample = dataset_.rows[pos_];
    if (speed_ == ReplaySpeed::kRealtime && pos_ > 0) {
      std::int64_t gap =
          sample.timestamp_ms - dataset_.rows[pos_ - 1].timestamp_ms;
      if (gap > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(gap));
      }
    }
    ++pos_;
    return sample;
  }

  const std::vector<std::string>& feature_names() const override {
    return dataset_.feature_names;
  }

 private:
  Dataset dataset_;
  ReplaySpeed speed_;
  std::size_t pos_ = 0;
};

}  // namespace

std::unique_ptr<SampleStream> open_replay(
    const std::string& path, ReplaySpeed speed,
    const std::optional<std::vector<std::string>>& expected_features) {
  Dataset dataset = read_trace_csv_file(path);
  if (expected_features && dataset.feature_names != *expected_features) {
    throw Error(ErrorCode::MalformedTrace,
                "trace header does not match the requested event list");
  }
  return std::make_unique<ReplayStream>(std::move(dataset), speed);
}

std::unique_ptr<SampleStream> replay_dataset(Dataset dataset,
                                             ReplaySpeed speed) {
  return std::make_unique<ReplayStream>(std::move(dataset), speed);
}

}  // namespace hpcd
