#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hpcd/detector.hpp"
#include "hpcd/error.hpp"
#include "hpcd/evaluation.hpp"
#include "hpcd/events.hpp"
#include "hpcd/feature_selection.hpp"
#include "hpcd/learners.hpp"
#include "hpcd/live.hpp"
#include "hpcd/profiles.hpp"
#include "hpcd/replay.hpp"
#include "hpcd/rng.hpp"
#include "hpcd/trace_csv.hpp"
#include "hpcd/util.hpp"

namespace fs = std::filesystem;
using namespace hpcd;

namespace {

struct GlobalConfig {
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  std::string config_path;
};

// Key = value lines, # comments. Recognized keys: seed, out_dir.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open config file: " + path);
  std::map<std::string, std::string> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig,
                  path + ":" + std::to_string(line_no) +
                      ": expected 'key = value'");
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

// Resolution order: flags > environment > config file > built-in defaults.
// Flags win by being parsed last; this pre-pass folds env and file values
// into the defaults CLI11 starts from.
GlobalConfig resolve_globals(int argc, char** argv) {
  GlobalConfig g;
  if (const char* env = std::getenv("HPCDETECT_CONFIG")) g.config_path = env;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      g.config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      g.config_path = arg.substr(9);
  }
  std::map<std::string, std::string> file;
  if (!g.config_path.empty()) file = read_config_file(g.config_path);
  if (const auto it = file.find("seed"); it != file.end())
    g.seed = std::stoull(it->second);
  if (const auto it = file.find("out_dir"); it != file.end())
    g.out_dir = it->second;
  if (const char* env = std::getenv("HPCDETECT_SEED")) g.seed = std::stoull(env);
  if (const char* env = std::getenv("HPCDETECT_OUT_DIR")) g.out_dir = env;
  return g;
}

std::string out_path(const GlobalConfig& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return (fs::path(g.out_dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

std::string input_line(const std::string& role, const std::string& path) {
  return "# input " + role + "=" + fs::path(path).filename().string() +
         " fnv1a64=" + hex64(fnv1a64_file(path)) + "\n";
}

// Every artifact opens with the resolved configuration that produced it.
std::string artifact_header(const std::string& subcommand,
                            const GlobalConfig& g,
                            const std::vector<std::string>& settings,
                            const std::vector<std::string>& input_lines) {
  std::string head = "# hpcdetect " + subcommand + "\n";
  head += "# config seed=" + std::to_string(g.seed);
  for (const std::string& s : settings) head += " " + s;
  head += "\n";
  for (const std::string& line : input_lines) head += line;
  return head;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::string catalog_names() {
  std::string names;
  for (const EventSpec& e : catalog()) {
    if (!names.empty()) names += ", ";
    names += e.name;
  }
  return names;
}

std::vector<EventSpec> resolve_events(const std::string& list) {
  std::vector<EventSpec> events;
  if (list == "all") {
    events = catalog();
    return events;
  }
  for (const std::string& name : split_list(list)) {
    const auto spec = find_event(name);
    if (!spec)
      throw CLI::ValidationError(
          "--events", "unknown event '" + name +
                          "'; known events: " + catalog_names());
    events.push_back(*spec);
  }
  if (events.empty())
    throw CLI::ValidationError("--events", "event list is empty");
  return events;
}

ClassLabel parse_label(const std::string& text) {
  for (int v = 0; v < kNumClasses; ++v)
    if (text == class_name(class_from_int(v))) return class_from_int(v);
  try {
    return class_from_int(std::stoi(text));
  } catch (const std::exception&) {
    throw CLI::ValidationError(
        "--label", "expected 0..4 or a class name (benign, spectre_v1, "
                   "spectre_v2, meltdown, spectre_v4)");
  }
}

std::string hyperparams_line(const Hyperparams& hp) {
  return "rounds=" + std::to_string(hp.adaboost_rounds) +
         " tree_depth=" + std::to_string(hp.adaboost_tree_depth) +
         " epochs=" + std::to_string(hp.epochs) +
         " learning_rate=" + format_double(hp.learning_rate) +
         " l2=" + format_double(hp.l2) + " k=" + std::to_string(hp.knn_k);
}

// ---------------------------------------------------------------- collect

struct CollectOpts {
  std::int64_t pid = 0;
  // Live sampling is capped at 8 concurrent events; the default is the four
  // counters the shipped models consume.
  std::string events = "LL_ACCESS,L1D_WRITE,DTLB_WRITE,DTLB_READ";
  std::int64_t interval_ms = 1;
  bool interval_given = false;
  std::int64_t duration_ms = 2000;
  int max_group_size = 4;
  std::string label;
  std::string output = "collect.csv";
};

void cmd_collect(const GlobalConfig& g, const CollectOpts& opts) {
  SamplingConfig config;
  config.pid = opts.pid;
  config.events = resolve_events(opts.events);
  config.max_group_size = opts.max_group_size;
  if (opts.duration_ms < 0)
    throw CLI::ValidationError("--duration-ms", "must be non-negative");

  // The flag beats the sampler's own environment override; once resolved
  // here, the variable is cleared so open_live sees only the final value.
  std::int64_t interval = opts.interval_ms;
  if (!opts.interval_given) {
    if (const char* env = std::getenv(kIntervalEnvVar)) {
      try {
        interval = std::stoll(env);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig,
                    std::string(kIntervalEnvVar) + " is not an integer");
      }
    }
  }
#ifndef _WIN32
  unsetenv(kIntervalEnvVar);
#endif
  config.interval_ms = interval;

  std::optional<ClassLabel> label;
  if (!opts.label.empty()) label = parse_label(opts.label);

  auto stream = open_live(config);
  Dataset ds;
  ds.feature_names = stream->feature_names();
  while (opts.duration_ms > 0) {
    auto sample = stream->next();
    if (!sample || sample->timestamp_ms > opts.duration_ms) break;
    if (label) sample->label = label;
    ds.rows.push_back(std::move(*sample));
  }
  const std::string path = out_path(g, opts.output);
  write_trace_csv_file(path, ds);
  std::cout << "collected rows=" << ds.size()
            << " dropped=" << stream->dropped() << " file=" << path
            << " fnv1a64=" << hex64(fnv1a64_file(path)) << "\n";
}

// ------------------------------------------------------------------ synth

struct SynthOpts {
  std::string profiles_file;
  std::string emit_profiles;
  std::string calibrate_trace;
  std::string calibrate_manifest;
  double scale = 1.0;
  std::uint64_t validation_seed = 0;
  bool validation_seed_given = false;
};

std::map<std::string, Dataset> group_by_manifest(const Dataset& data,
                                                 const DatasetManifest& m) {
  if (m.rows != data.size() || m.feature_names != data.feature_names)
    throw Error(ErrorCode::SchemaMismatch,
                "manifest does not describe this trace");
  std::map<std::string, Dataset> groups;
  std::size_t offset = 0;
  for (const ScenarioProvenance& s : m.scenarios) {
    Dataset block;
    block.feature_names = data.feature_names;
    block.rows.assign(data.rows.begin() + static_cast<std::ptrdiff_t>(offset),
                      data.rows.begin() +
                          static_cast<std::ptrdiff_t>(offset + s.rows));
    groups.emplace(s.name, std::move(block));
    offset += s.rows;
  }
  return groups;
}

void cmd_synth(const GlobalConfig& g, const SynthOpts& opts) {
  if (!opts.calibrate_trace.empty()) {
    if (opts.emit_profiles.empty() || opts.calibrate_manifest.empty())
      throw CLI::ValidationError(
          "--calibrate-from",
          "needs --calibrate-manifest and --emit-profiles");
    const Dataset data = read_trace_csv_file(opts.calibrate_trace);
    std::ifstream mf(opts.calibrate_manifest);
    if (!mf)
      throw Error(ErrorCode::IoError,
                  "cannot open manifest: " + opts.calibrate_manifest);
    std::stringstream buf;
    buf << mf.rdbuf();
    const DatasetManifest manifest = DatasetManifest::from_json(buf.str());
    const ProfileLibrary fitted =
        calibrate_from_traces(group_by_manifest(data, manifest));
    const std::string path = out_path(g, opts.emit_profiles);
    save_library(path, fitted);
    std::cout << "calibrated profiles=" << fitted.profiles.size()
              << " file=" << path << "\n";
    return;
  }

  ProfileLibrary library = opts.profiles_file.empty()
                               ? default_library()
                               : load_library(opts.profiles_file);
  if (!opts.emit_profiles.empty()) {
    const std::string path = out_path(g, opts.emit_profiles);
    save_library(path, library);
    std::cout << "profiles=" << library.profiles.size() << " file=" << path
              << "\n";
    return;
  }

  if (!(opts.scale > 0.0))
    throw CLI::ValidationError("--scale", "must be positive");
  if (opts.scale != 1.0) {
    for (auto& [name, count] : library.train_counts)
      count = static_cast<std::size_t>(std::max<long long>(
          1, std::llround(static_cast<double>(count) * opts.scale)));
    for (auto& [name, count] : library.validation_counts)
      count = static_cast<std::size_t>(std::max<long long>(
          1, std::llround(static_cast<double>(count) * opts.scale)));
  }
  const std::uint64_t vseed =
      opts.validation_seed_given ? opts.validation_seed : g.seed;

  CorpusBuild corpus = build_corpus(library, g.seed, vseed);
  const std::string train_path = out_path(g, "train.csv");
  const std::string val_path = out_path(g, "validation.csv");
  write_trace_csv_file(train_path, corpus.train_test);
  write_trace_csv_file(val_path, corpus.validation);
  corpus.train_manifest.trace_file = fs::path(train_path).filename().string();
  corpus.train_manifest.trace_hash = hex64(fnv1a64_file(train_path));
  corpus.validation_manifest.trace_file =
      fs::path(val_path).filename().string();
  corpus.validation_manifest.trace_hash = hex64(fnv1a64_file(val_path));
  write_text_file(out_path(g, "train.manifest.json"),
                  corpus.train_manifest.to_json() + "\n");
  write_text_file(out_path(g, "validation.manifest.json"),
                  corpus.validation_manifest.to_json() + "\n");
  std::cout << "train rows=" << corpus.train_test.size()
            << " fnv1a64=" << corpus.train_manifest.trace_hash
            << "\nvalidation rows=" << corpus.validation.size()
            << " fnv1a64=" << corpus.validation_manifest.trace_hash << "\n";
}

// ----------------------------------------------------------------- select

struct SelectOpts {
  std::string data;
  std::string manifest;
  std::size_t top = 4;
  std::size_t trees = 100;
  int max_depth = 12;
  std::size_t min_leaf = 5;
  unsigned threads = 1;
  std::string report = "selection.txt";
  std::string selected_out = "selected_features.txt";
};

void cmd_select(const GlobalConfig& g, const SelectOpts& opts) {
  const Dataset data = read_trace_csv_file(opts.data);
  RfImportanceOptions rf_opts;
  rf_opts.trees = opts.trees;
  rf_opts.max_depth = opts.max_depth;
  rf_opts.min_leaf = opts.min_leaf;
  rf_opts.threads = opts.threads;
  ImportanceReport rf =
      rf_importance(data, opts.trees, g.seed, rf_opts);
  rf.selected = select_features(rf, opts.top);
  // The principal-component view is informational; the forest ranking is
  // what drives the selected set.
  const ImportanceReport pca = pca_rank(data, opts.top);

  std::vector<std::string> inputs = {input_line("data", opts.data)};
  if (!opts.manifest.empty())
    inputs.push_back(input_line("manifest", opts.manifest));
  std::string text = artifact_header(
      "select", g,
      {"top=" + std::to_string(opts.top),
       "trees=" + std::to_string(opts.trees),
       "max_depth=" + std::to_string(opts.max_depth),
       "min_leaf=" + std::to_string(opts.min_leaf)},
      inputs);
  text += render_importance_report(rf);
  text += "\n";
  text += render_importance_report(pca);

  const std::string report_path = out_path(g, opts.report);
  write_text_file(report_path, text);
  std::string selected;
  for (const std::string& name : rf.selected) selected += name + "\n";
  const std::string selected_path = out_path(g, opts.selected_out);
  write_text_file(selected_path, selected);
  std::cout << "selected=";
  for (std::size_t i = 0; i < rf.selected.size(); ++i)
    std::cout << (i ? "," : "") << rf.selected[i];
  std::cout << " report=" << report_path << "\n";
}

// ------------------------------------------------------------------ train

struct TrainOpts {
  std::string data;
  std::string algo = "adaboost";
  std::string features;
  std::string features_file;
  std::string model = "model.txt";
  Hyperparams hp;
};

Dataset project_if_requested(const Dataset& data, const std::string& features,
                             const std::string& features_file) {
  if (!features.empty()) return data.project(split_list(features));
  if (!features_file.empty()) {
    std::ifstream in(features_file);
    if (!in)
      throw Error(ErrorCode::IoError,
                  "cannot open features file: " + features_file);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) names.push_back(line);
    }
    return data.project(names);
  }
  return data;
}

void cmd_train(const GlobalConfig& g, const TrainOpts& opts) {
  const Algorithm algorithm = algorithm_from_name(opts.algo);
  const Dataset full = read_trace_csv_file(opts.data);
  const Dataset data =
      project_if_requested(full, opts.features, opts.features_file);
  const TrainedModel model = train(algorithm, data, opts.hp, g.seed);
  const std::string path = out_path(g, opts.model);
  save_model(path, model);
  std::cout << "trained algo=" << algorithm_name(algorithm)
            << " rows=" << data.size() << " features=" << data.width()
            << " converged=" << (model.converged ? 1 : 0)
            << " final_loss=" << format_double(model.final_loss)
            << " model=" << path
            << " fnv1a64=" << hex64(fnv1a64_file(path)) << "\n";
}

// --------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string data;
  std::string model;
  std::string manifest;
  int kfold = 0;
  std::string report = "evaluation.txt";
};

std::string roc_sections(const TrainedModel& model, const Dataset& data) {
  std::string text;
  for (ClassLabel cls : model.class_set) {
    try {
      text += render_roc(roc(model, data, cls));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ClassAbsent) throw;
      text += "roc positive=" + std::string(class_name(cls)) +
              " skipped=class-absent\n";
    }
  }
  return text;
}

void cmd_evaluate(const GlobalConfig& g, const EvaluateOpts& opts) {
  const TrainedModel model = load_model(opts.model);
  const Dataset full = read_trace_csv_file(opts.data);
  const Dataset data = full.project(model.feature_names);

  std::vector<std::string> inputs = {input_line("data", opts.data),
                                     input_line("model", opts.model)};
  if (!opts.manifest.empty())
    inputs.push_back(input_line("manifest", opts.manifest));
  std::string text = artifact_header(
      "evaluate", g,
      {"algorithm=" + std::string(algorithm_name(model.algorithm)),
       hyperparams_line(model.hyperparams),
       "kfold=" + std::to_string(opts.kfold)},
      inputs);

  if (opts.kfold > 0) {
    // Re-trains with the model's own algorithm and hyperparameters.
    const CrossValidation cv = cross_validate(
        model.algorithm, data, opts.kfold, model.hyperparams, g.seed);
    text += "fold accuracy macro_f1\n";
    for (std::size_t f = 0; f < cv.folds.size(); ++f)
      text += std::to_string(f) + " " + format_double(cv.folds[f].accuracy) +
              " " + format_double(cv.folds[f].macro_f1) + "\n";
    text += "mean_accuracy " + format_double(cv.mean_accuracy) + "\n";
    text += "stddev_accuracy " + format_double(cv.stddev_accuracy) + "\n";
    const std::string path = out_path(g, opts.report);
    write_text_file(path, text);
    std::cout << "kfold=" << opts.kfold
              << " mean_accuracy=" << format_double(cv.mean_accuracy)
              << " stddev=" << format_double(cv.stddev_accuracy)
              << " report=" << path << "\n";
    return;
  }

  const ConfusionMatrix cm = confusion(model, data);
  const MetricsReport m = metrics(cm);
  text += render_confusion(cm);
  text += render_metrics(m);
  text += roc_sections(model, data);
  const std::string path = out_path(g, opts.report);
  write_text_file(path, text);
  std::cout << "accuracy=" << format_double(m.accuracy)
            << " macro_f1=" << format_double(m.macro_f1) << " report=" << path
            << "\n";
}

// --------------------------------------------------------------- validate

struct ValidateOpts {
  std::string data;
  std::string model;
  std::string manifest;
  std::string report = "validation.txt";
};

void cmd_validate(const GlobalConfig& g, const ValidateOpts& opts) {
  const TrainedModel model = load_model(opts.model);
  const Dataset full = read_trace_csv_file(opts.data);
  const Dataset data = full.project(model.feature_names);

  std::vector<std::string> inputs = {input_line("data", opts.data),
                                     input_line("model", opts.model)};
  std::optional<DatasetManifest> manifest;
  if (!opts.manifest.empty()) {
    std::ifstream mf(opts.manifest);
    if (!mf)
      throw Error(ErrorCode::IoError,
                  "cannot open manifest: " + opts.manifest);
    std::stringstream buf;
    buf << mf.rdbuf();
    manifest = DatasetManifest::from_json(buf.str());
    if (manifest->rows != full.size() ||
        manifest->feature_names != full.feature_names)
      throw Error(ErrorCode::SchemaMismatch,
                  "manifest does not describe this trace");
    inputs.push_back(input_line("manifest", opts.manifest));
  }

  std::string text = artifact_header(
      "validate", g,
      {"algorithm=" + std::string(algorithm_name(model.algorithm)),
       hyperparams_line(model.hyperparams)},
      inputs);

  const ConfusionMatrix cm = confusion(model, data);
  const MetricsReport m = metrics(cm);
  text += render_confusion(cm);
  text += render_metrics(m);
  if (manifest) {
    text += "scenario rows accuracy\n";
    std::size_t offset = 0;
    for (const ScenarioProvenance& s : manifest->scenarios) {
      std::size_t correct = 0;
      for (std::size_t i = offset; i < offset + s.rows; ++i)
        if (predict_sample(model, data.rows[i]) == s.label) ++correct;
      text += s.name + " " + std::to_string(s.rows) + " " +
              format_double(static_cast<double>(correct) /
                            static_cast<double>(s.rows)) +
              "\n";
      offset += s.rows;
    }
  }
  const std::string path = out_path(g, opts.report);
  write_text_file(path, text);
  std::cout << "accuracy=" << format_double(m.accuracy) << " report=" << path
            << "\n";
}

// ----------------------------------------------------------------- detect

struct DetectOpts {
  std::string model;
  std::vector<std::string> replays;
  std::vector<std::int64_t> pids;
  int window = 50;
  double threshold = 0.6;
  std::int64_t cooldown_ms = 5000;
  bool realtime = false;
  bool fail_on_alert = false;
  std::int64_t duration_ms = 2000;
  std::string alerts = "alerts.txt";
};

/// Caps a live stream by sample timestamp so `detect --pid` terminates.
class DurationLimitedStream final : public SampleStream {
 public:
  DurationLimitedStream(std::unique_ptr<SampleStream> inner,
                        std::int64_t limit_ms)
      : inner_(std::move(inner)), limit_ms_(limit_ms) {}

  std::optional<Sample> next() override {
    if (done_) return std::nullopt;
    auto sample = inner_->next();
    if (!sample || sample->timestamp_ms > limit_ms_) {
      done_ = true;
      return std::nullopt;
    }
    return sample;
  }

  const std::vector<std::string>& feature_names() const override {
    return inner_->feature_names();
  }

  std::uint64_t dropped() const override { return inner_->dropped(); }

 private:
  std::unique_ptr<SampleStream> inner_;
  std::int64_t limit_ms_;
  bool done_ = false;
};

int cmd_detect(const GlobalConfig& g, const DetectOpts& opts) {
  if (opts.replays.empty() == opts.pids.empty())
    throw CLI::ValidationError(
        "--replay/--pid", "exactly one input kind: trace replay or live pid");
  const TrainedModel model = load_model(opts.model);

  std::vector<std::unique_ptr<SampleStream>> streams;
  std::vector<std::string> inputs = {input_line("model", opts.model)};
  for (const std::string& path : opts.replays) {
    streams.push_back(open_replay(
        path,
        opts.realtime ? ReplaySpeed::kRealtime : ReplaySpeed::kUnthrottled));
    inputs.push_back(input_line("replay", path));
  }
  for (std::int64_t pid : opts.pids) {
    SamplingConfig config;
    config.pid = pid;
    for (const std::string& name : model.feature_names) {
      const auto spec = find_event(name);
      if (!spec)
        throw CLI::ValidationError(
            "--pid", "model feature '" + name +
                         "' is not a live counter; known events: " +
                         catalog_names());
      config.events.push_back(*spec);
    }
    streams.push_back(std::make_unique<DurationLimitedStream>(
        open_live(config), opts.duration_ms));
  }

  DetectorConfig config;
  config.window = opts.window;
  config.alert_threshold = opts.threshold;
  config.cooldown_ms = opts.cooldown_ms;

  std::string text = artifact_header(
      "detect", g,
      {"window=" + std::to_string(opts.window),
       "threshold=" + format_double(opts.threshold),
       "cooldown_ms=" + std::to_string(opts.cooldown_ms)},
      inputs);
  std::ostringstream lines;
  const DetectorRunSummary summary = run_detector(
      model, std::move(streams), config, [&](const DetectionVerdict& v) {
        if (!v.alert) return;
        std::ostringstream line;
        line << "alert ts=" << v.timestamp_ms << " pid=" << v.pid
             << " class=" << class_name(v.alert->attack_class)
             << " confidence=" << format_double(v.alert->confidence)
             << " votes=";
        for (int k = 0; k < kNumClasses; ++k)
          line << (k ? "," : "")
               << format_double(v.vote_fraction[static_cast<std::size_t>(k)]);
        if (v.stream_dropped > 0) line << " dropped=" << v.stream_dropped;
        lines << line.str() << "\n";
        std::cout << line.str() << "\n";
      });
  text += lines.str();
  for (const std::string& err : summary.stream_errors)
    text += "# stream-detached " + err + "\n";
  text += "# summary samples=" + std::to_string(summary.samples) +
          " alerts=" + std::to_string(summary.alerts) +
          " dropped=" + std::to_string(summary.dropped) + "\n";
  const std::string path = out_path(g, opts.alerts);
  write_text_file(path, text);
  std::cout << "samples=" << summary.samples << " alerts=" << summary.alerts
            << " dropped=" << summary.dropped << " alerts_file=" << path
            << "\n";
  return opts.fail_on_alert && summary.alerts > 0 ? 2 : 0;
}

// ----------------------------------------------------------------- report

struct ReportOpts {
  std::string data;
  std::string manifest;
  std::string features;
  std::string report = "distribution.txt";
};

void cmd_report(const GlobalConfig& g, const ReportOpts& opts) {
  const Dataset full = read_trace_csv_file(opts.data);
  std::vector<std::string> inputs = {input_line("data", opts.data)};

  std::vector<DistributionSummary> summaries;
  if (!opts.manifest.empty()) {
    std::ifstream mf(opts.manifest);
    if (!mf)
      throw Error(ErrorCode::IoError,
                  "cannot open manifest: " + opts.manifest);
    std::stringstream buf;
    buf << mf.rdbuf();
    const DatasetManifest manifest = DatasetManifest::from_json(buf.str());
    inputs.push_back(input_line("manifest", opts.manifest));
    const Dataset data = opts.features.empty()
                             ? full
                             : full.project(split_list(opts.features));
    DatasetManifest projected = manifest;
    projected.feature_names = data.feature_names;
    summaries = distribution_summary(data, projected);
  } else {
    const Dataset data = opts.features.empty()
                             ? full
                             : full.project(split_list(opts.features));
    summaries = distribution_summary_by_label(data);
  }

  std::string text = artifact_header("report", g, {}, inputs);
  text += render_distribution_report(summaries);
  const std::string path = out_path(g, opts.report);
  write_text_file(path, text);
  std::cout << "groups=" << summaries.size() << " report=" << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  GlobalConfig g;
  int exit_code = 0;
  try {
    g = resolve_globals(argc, argv);

    CLI::App app{
        "Per-process counter sampling, synthetic corpora, feature "
        "selection, classifier training and online attack detection"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "master seed for all derived RNG")
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for output artifacts")
        ->capture_default_str();
    app.add_option("--config", g.config_path,
                   "config file with 'key = value' lines (keys: seed, "
                   "out_dir); precedence flags > env > file");

    CollectOpts collect_opts;
    CLI::App* collect =
        app.add_subcommand("collect", "capture live counters to a trace CSV");
    collect->add_option("--pid", collect_opts.pid, "process to monitor")
        ->required();
    collect->add_option("--events", collect_opts.events,
                        "comma-separated event names (live sampling allows "
                        "at most 8)")
        ->capture_default_str();
    CLI::Option* interval_opt =
        collect->add_option("--interval-ms", collect_opts.interval_ms,
                            "sampling interval")
            ->capture_default_str();
    collect->add_option("--duration-ms", collect_opts.duration_ms,
                        "capture length; 0 writes a header-only trace")
        ->capture_default_str();
    collect->add_option("--max-group-size", collect_opts.max_group_size,
                        "counter group width")
        ->capture_default_str();
    collect->add_option("--label", collect_opts.label,
                        "stamp every row with this class label");
    collect->add_option("--output", collect_opts.output, "trace file name")
        ->capture_default_str();
    collect->callback([&] {
      collect_opts.interval_given = interval_opt->count() > 0;
      cmd_collect(g, collect_opts);
    });

    SynthOpts synth_opts;
    CLI::App* synth = app.add_subcommand(
        "synth", "generate the synthetic train/validation corpora");
    synth->add_option("--profiles", synth_opts.profiles_file,
                      "profile library file to use instead of the built-in");
    synth->add_option("--emit-profiles", synth_opts.emit_profiles,
                      "write the profile library to this file and exit");
    synth->add_option("--calibrate-from", synth_opts.calibrate_trace,
                      "fit a profile library from this labeled trace");
    synth->add_option("--calibrate-manifest", synth_opts.calibrate_manifest,
                      "manifest describing the calibration trace");
    synth->add_option("--scale", synth_opts.scale,
                      "multiply per-scenario row counts")
        ->capture_default_str();
    CLI::Option* vseed_opt = synth->add_option(
        "--validation-seed", synth_opts.validation_seed,
        "seed for the validation corpus (default: --seed)");
    synth->callback([&] {
      synth_opts.validation_seed_given = vseed_opt->count() > 0;
      cmd_synth(g, synth_opts);
    });

    SelectOpts select_opts;
    CLI::App* select =
        app.add_subcommand("select", "rank features and pick the top subset");
    select->add_option("--data", select_opts.data, "labeled trace CSV")
        ->required();
    select->add_option("--manifest", select_opts.manifest,
                       "manifest for provenance hashing");
    select->add_option("--top", select_opts.top, "selection size")
        ->capture_default_str();
    select->add_option("--trees", select_opts.trees, "forest size")
        ->capture_default_str();
    select->add_option("--max-depth", select_opts.max_depth, "tree depth cap")
        ->capture_default_str();
    select->add_option("--min-leaf", select_opts.min_leaf,
                       "minimum rows per leaf")
        ->capture_default_str();
    select->add_option("--threads", select_opts.threads,
                       "worker threads (0 = hardware)")
        ->capture_default_str();
    select->add_option("--report", select_opts.report, "report file name")
        ->capture_default_str();
    select->add_option("--selected-out", select_opts.selected_out,
                       "selected feature list file name")
        ->capture_default_str();
    select->callback([&] { cmd_select(g, select_opts); });

    TrainOpts train_opts;
    CLI::App* train_cmd =
        app.add_subcommand("train", "fit a classifier and save the model");
    train_cmd->add_option("--data", train_opts.data, "labeled trace CSV")
        ->required();
    train_cmd
        ->add_option("--algo", train_opts.algo,
                     "lda | lr | knn | svm | adaboost")
        ->capture_default_str();
    train_cmd->add_option("--features", train_opts.features,
                          "comma-separated feature subset");
    train_cmd->add_option("--features-file", train_opts.features_file,
                          "file with one feature name per line");
    train_cmd->add_option("--model", train_opts.model, "model file name")
        ->capture_default_str();
    train_cmd
        ->add_option("--rounds", train_opts.hp.adaboost_rounds,
                     "boosting rounds")
        ->capture_default_str();
    train_cmd
        ->add_option("--tree-depth", train_opts.hp.adaboost_tree_depth,
                     "boosted tree depth")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_opts.hp.epochs,
                          "gradient-descent epochs")
        ->capture_default_str();
    train_cmd
        ->add_option("--learning-rate", train_opts.hp.learning_rate,
                     "initial step size")
        ->capture_default_str();
    train_cmd->add_option("--l2", train_opts.hp.l2, "L2 penalty")
        ->capture_default_str();
    train_cmd->add_option("--k", train_opts.hp.knn_k, "neighbor count")
        ->capture_default_str();
    train_cmd->callback([&] { cmd_train(g, train_opts); });

    EvaluateOpts evaluate_opts;
    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "confusion matrix, metrics and operating curves");
    evaluate->add_option("--data", evaluate_opts.data, "labeled trace CSV")
        ->required();
    evaluate->add_option("--model", evaluate_opts.model, "model file")
        ->required();
    evaluate->add_option("--manifest", evaluate_opts.manifest,
                         "manifest for provenance hashing");
    evaluate->add_option("--kfold", evaluate_opts.kfold,
                         "re-train per fold with the model's settings");
    evaluate->add_option("--report", evaluate_opts.report, "report file name")
        ->capture_default_str();
    evaluate->callback([&] { cmd_evaluate(g, evaluate_opts); });

    ValidateOpts validate_opts;
    CLI::App* validate = app.add_subcommand(
        "validate", "evaluate against an unseen-scenario corpus");
    validate->add_option("--data", validate_opts.data, "validation trace CSV")
        ->required();
    validate->add_option("--model", validate_opts.model, "model file")
        ->required();
    validate->add_option("--manifest", validate_opts.manifest,
                         "manifest enabling the per-scenario table");
    validate->add_option("--report", validate_opts.report, "report file name")
        ->capture_default_str();
    validate->callback([&] { cmd_validate(g, validate_opts); });

    DetectOpts detect_opts;
    CLI::App* detect = app.add_subcommand(
        "detect", "classify a sample stream and emit windowed alerts");
    detect->add_option("--model", detect_opts.model, "model file")->required();
    detect->add_option("--replay", detect_opts.replays,
                       "trace CSV to replay (repeatable)");
    detect->add_option("--pid", detect_opts.pids,
                       "process to monitor live (repeatable)");
    detect->add_option("--window", detect_opts.window, "vote window length")
        ->capture_default_str();
    detect
        ->add_option("--threshold", detect_opts.threshold,
                     "vote fraction an attack class must exceed")
        ->capture_default_str();
    detect->add_option("--cooldown-ms", detect_opts.cooldown_ms,
                       "per process and class alert cooldown")
        ->capture_default_str();
    detect->add_flag("--realtime", detect_opts.realtime,
                     "honor trace timestamps when replaying");
    detect->add_flag("--fail-on-alert", detect_opts.fail_on_alert,
                     "exit 2 if any alert fires");
    detect->add_option("--duration-ms", detect_opts.duration_ms,
                       "live capture length")
        ->capture_default_str();
    detect->add_option("--alerts", detect_opts.alerts, "alert file name")
        ->capture_default_str();
    detect->callback([&] { exit_code = cmd_detect(g, detect_opts); });

    ReportOpts report_opts;
    CLI::App* report = app.add_subcommand(
        "report", "per-scenario feature distribution summaries");
    report->add_option("--data", report_opts.data, "labeled trace CSV")
        ->required();
    report->add_option("--manifest", report_opts.manifest,
                       "manifest with per-scenario row provenance");
    report->add_option("--features", report_opts.features,
                       "comma-separated feature subset");
    report->add_option("--report", report_opts.report, "report file name")
        ->capture_default_str();
    report->callback([&] { cmd_report(g, report_opts); });

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 64;
    }
    return exit_code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::PlatformUnsupported ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
