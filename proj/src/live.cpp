#include "hpcd/live.hpp"

#include <cstdlib>
#include <string>

#include "hpcd/error.hpp"

#ifdef __linux__

#include <linux/perf_event.h>
#include <sys/ioctl.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

namespace hpcd {
namespace {

struct PerfId {
  std::uint32_t type;
  std::uint64_t config;
};

constexpr std::uint64_t cache_config(std::uint64_t cache, std::uint64_t op,
                                     std::uint64_t result) {
  return cache | (op << 8) | (result << 16);
}

/// Catalog name -> perf_event_attr identity. The *_ACCESS cache names map
/// to (op READ, result ACCESS), same as *_READ: the kernel exposes no
/// combined access counter, so both names observe read traffic.
PerfId perf_id_for(const std::string& name) {
  if (name == "CPU_CYCLES") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_CPU_CYCLES};
  if (name == "INSTRUCTIONS") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_INSTRUCTIONS};
  if (name == "CACHE_REFERENCES") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_CACHE_REFERENCES};
  if (name == "CACHE_MISSES") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_CACHE_MISSES};
  if (name == "BRANCH_MISSES") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_BRANCH_MISSES};
  if (name == "BUS_CYCLES") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_BUS_CYCLES};
  if (name == "REF_CPU_CYCLES") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_REF_CPU_CYCLES};
  if (name == "BRANCH_INSTRUCTIONS") return {PERF_TYPE_HARDWARE, PERF_COUNT_HW_BRANCH_INSTRUCTIONS};

  if (name == "CPU_CLOCK") return {PERF_TYPE_SOFTWARE, PERF_COUNT_SW_CPU_CLOCK};
  if (name == "TASK_CLOCK") return {PERF_TYPE_SOFTWARE, PERF_COUNT_SW_TASK_CLOCK};
  if (name == "PAGE_FAULTS") return {PERF_TYPE_SOFTWARE, PERF_COUNT_SW_PAGE_FAULTS};
  if (name == "CONTEXT_SWITCHES") return {PERF_TYPE_SOFTWARE, PERF_COUNT_SW_CONTEXT_SWITCHES};

  struct CacheName {
    const char* prefix;
    std::uint64_t cache;
  };
  static const CacheName caches[] = {
      {"L1D", PERF_COUNT_HW_CACHE_L1D},   {"L1I", PERF_COUNT_HW_CACHE_L1I},
      {"LL", PERF_COUNT_HW_CACHE_LL},     {"DTLB", PERF_COUNT_HW_CACHE_DTLB},
      {"ITLB", PERF_COUNT_HW_CACHE_ITLB}, {"BPU", PERF_COUNT_HW_CACHE_BPU},
  };
  for (const auto& c : caches) {
    std::string prefix = std::string(c.prefix) + "_";
    if (name.rfind(prefix, 0) != 0) continue;
    std::string suffix = name.substr(prefix.size());
    if (suffix == "READ" || suffix == "ACCESS") {
      return {PERF_TYPE_HW_CACHE,
              cache_config(c.cache, PERF_COUNT_HW_CACHE_OP_READ,
                           PERF_COUNT_HW_CACHE_RESULT_ACCESS)};
    }
    if (suffix == "WRITE") {
      return {PERF_TYPE_HW_CACHE,
              cache_config(c.cache, PERF_COUNT_HW_CACHE_OP_WRITE,
                           PERF_COUNT_HW_CACHE_RESULT_ACCESS)};
    }
    if (suffix == "MISS") {
      return {PERF_TYPE_HW_CACHE,
              cache_config(c.cache, PERF_COUNT_HW_CACHE_OP_READ,
                           PERF_COUNT_HW_CACHE_RESULT_MISS)};
    }
  }
  throw Error(ErrorCode::EventUnavailable, "no kernel mapping for " + name);
}

[[noreturn]] void throw_open_error(int err, const std::string& event) {
  switch (err) {
    case EACCES:
    case EPERM:
      throw Error(ErrorCode::PermissionDenied,
                  "kernel refused counter access for " + event +
                      " (check perf_event_paranoid)");
    case ESRCH:
      throw Error(ErrorCode::NoSuchProcess, "target process is gone");
    case ENOENT:
    case EOPNOTSUPP:
    case ENODEV:
      throw Error(ErrorCode::EventUnavailable,
                  event + " is not countable on this machine");
    case ENOSYS:
      throw Error(ErrorCode::PlatformUnsupported,
                  "kernel lacks performance counter support");
    default:
      throw Error(ErrorCode::EventUnavailable,
                  event + ": " + std::strerror(err));
  }
}

int open_counter(const PerfId& id, pid_t pid, int group_fd,
                 const std::string& event) {
  perf_event_attr attr{};
  attr.size = sizeof(attr);
  attr.type = id.type;
  attr.config = id.config;
  attr.disabled = (group_fd == -1) ? 1 : 0;
  attr.read_format = PERF_FORMAT_GROUP | PERF_FORMAT_TOTAL_TIME_ENABLED |
                     PERF_FORMAT_TOTAL_TIME_RUNNING;
  attr.exclude_hv = 1;

  long fd = syscall(SYS_perf_event_open, &attr, pid, -1, group_fd, 0);
  if (fd < 0 && (errno == EACCES || errno == EPERM)) {
    attr.exclude_kernel = 1;
    fd = syscall(SYS_perf_event_open, &attr, pid, -1, group_fd, 0);
  }
  if (fd < 0) throw_open_error(errno, event);
  return static_cast<int>(fd);
}

struct Group {
  std::vector<int> fds;
  std::vector<std::size_t> slots;
  std::vector<double> baseline;
  std::vector<double> last;
};

class LiveStream final : public SampleStream {
 public:
  explicit LiveStream(const SamplingConfig& config) : config_(config) {
    names_.reserve(config.events.size());
    for (const auto& spec : config.events) names_.push_back(spec.name);

    auto groups = schedule_groups(config.events, config.max_group_size);
    std::size_t slot = 0;
    try {
      for (const auto& group : groups) {
        Group g;
        for (const auto& spec : group) {
          int leader = g.fds.empty() ? -1 : g.fds.front();
          g.fds.push_back(open_counter(perf_id_for(spec.name),
                                       static_cast<pid_t>(config.pid), leader,
                                       spec.name));
          g.slots.push_back(slot++);
        }
        g.baseline.assign(g.fds.size(), 0.0);
        g.last.assign(g.fds.size(), 0.0);
        groups_.push_back(std::move(g));
      }
    } catch (...) {
      close_all();
      throw;
    }
    for (auto& g : groups_) {
      if (ioctl(g.fds.front(), PERF_EVENT_IOC_RESET, PERF_IOC_FLAG_GROUP) != 0 ||
          ioctl(g.fds.front(), PERF_EVENT_IOC_ENABLE, PERF_IOC_FLAG_GROUP) != 0) {
        int err = errno;
        close_all();
        throw_open_error(err, "group enable");
      }
    }
    if (!read_groups(true)) {
      close_all();
      throw Error(ErrorCode::NoSuchProcess, "target exited before sampling");
    }
    worker_ = std::thread([this] { run(); });
  }

  ~LiveStream() override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
    close_all();
  }

  std::optional<Sample> next() override {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return !queue_.empty() || finished_ || stopping_; });
    if (queue_.empty()) return std::nullopt;
    Sample s = std::move(queue_.front());
    queue_.pop_front();
    return s;
  }

  const std::vector<std::string>& feature_names() const override {
    return names_;
  }

  std::uint64_t dropped() const override {
    std::lock_guard<std::mutex> lock(mu_);
    return dropped_;
  }

 private:
  void close_all() {
    for (auto& g : groups_) {
      for (int fd : g.fds) {
        if (fd >= 0) close(fd);
      }
    }
    groups_.clear();
  }

  /// One scaled cumulative read of every group. Returns false once the
  /// target process is unreadable (exited).
  bool read_groups(bool as_baseline) {
    for (auto& g : groups_) {
      // nr, time_enabled, time_running, then one u64 per member.
      std::vector<std::uint64_t> buf(3 + g.fds.size());
      ssize_t got = read(g.fds.front(), buf.data(),
                         buf.size() * sizeof(std::uint64_t));
      if (got < static_cast<ssize_t>(buf.size() * sizeof(std::uint64_t))) {
        return false;
      }
      double enabled = static_cast<double>(buf[1]);
      double running = static_cast<double>(buf[2]);
      double scale = (running > 0.0) ? enabled / running : 0.0;
      for (std::size_t i = 0; i < g.fds.size(); ++i) {
        double value = static_cast<double>(buf[3 + i]) * scale;
        if (as_baseline) {
          g.baseline[i] = value;
        }
        g.last[i] = value;
      }
    }
    return true;
  }

  void run() {
    using clock = std::chrono::steady_clock;
    const auto interval = std::chrono::milliseconds(config_.interval_ms);
    auto next_tick = clock::now() + interval;
    std::vector<double> previous(names_.size(), 0.0);
    for (auto& g : groups_) {
      for (std::size_t i = 0; i < g.slots.size(); ++i) {
        previous[g.slots[i]] = g.last[i];
      }
    }
    const auto start = clock::now();

    while (true) {
      {
        std::unique_lock<std::mutex> lock(mu_);
        if (cv_.wait_until(lock, next_tick, [this] { return stopping_; })) {
          return;
        }
      }
      // A late read keeps its true timestamp; the tick grid stays fixed so
      // lateness never accumulates.
      auto now = clock::now();
      bool alive = read_groups(false);
      Sample s;
      s.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           now - start)
                           .count();
      s.pid = config_.pid;
      s.values.resize(names_.size());
      for (auto& g : groups_) {
        for (std::size_t i = 0; i < g.slots.size(); ++i) {
          double delta = g.last[i] - previous[g.slots[i]];
          previous[g.slots[i]] = g.last[i];
          if (delta < 0.0) delta = 0.0;
          s.values[g.slots[i]] = static_cast<std::uint64_t>(std::llround(delta));
        }
      }
      {
        std::lock_guard<std::mutex> lock(mu_);
        if (alive) {
          if (queue_.size() >= kQueueCapacity) {
            queue_.pop_front();
            ++dropped_;
          }
          queue_.push_back(std::move(s));
        } else {
          finished_ = true;
        }
      }
      cv_.notify_all();
      if (!alive) return;
      next_tick += interval;
    }
  }

  static constexpr std::size_t kQueueCapacity = 4096;

  SamplingConfig config_;
  std::vector<std::string> names_;
  std::vector<Group> groups_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Sample> queue_;
  std::uint64_t dropped_ = 0;
  bool stopping_ = false;
  bool finished_ = false;
  std::thread worker_;
};

}  // namespace

std::unique_ptr<SampleStream> open_live(const SamplingConfig& config) {
  SamplingConfig resolved = config;
  if (const char* env = std::getenv(kIntervalEnvVar)) {
    char* end = nullptr;
    long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) {
      throw Error(ErrorCode::InvalidConfig,
                  std::string(kIntervalEnvVar) + " must be a positive integer");
    }
    resolved.interval_ms = value;
  }
  validate(resolved);
  return std::make_unique<LiveStream>(resolved);
}

bool live_supported() { return true; }

}  // namespace hpcd

#else  // !__linux__

namespace hpcd {

std::unique_ptr<SampleStream> open_live(const SamplingConfig&) {
  throw Error(ErrorCode::PlatformUnsupported,
              "per-process kernel counters require a Linux build");
}

bool live_supported() { return false; }

}  // namespace hpcd

#endif
