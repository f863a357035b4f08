#include "hpcd/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hpcd/error.hpp"
#include "hpcd/events.hpp"
#include "hpcd/rng.hpp"
#include "hpcd/util.hpp"

namespace hpcd {

using nlohmann::json;

const std::vector<std::string>& scenario_order() {
  static const std::vector<std::string> order = {
      "stress_c",      "stress_m",        "stress_i",   "firefox",
      "video",         "spectre_v1",      "spectre_v2", "meltdown",
      "meltdown_fast", "meltdown_nonull", "spectre_v4", "spectre_v1_alt",
      "mibench",
  };
  return order;
}

const ScenarioProfile& ProfileLibrary::at(const std::string& name) const {
  auto it = profiles.find(name);
  if (it == profiles.end()) {
    throw Error(ErrorCode::InvalidProfile, "no such scenario: " + name);
  }
  return it->second;
}

namespace {

FeatureDist ln_dist(const char* feature, double median, double log_sigma) {
  return FeatureDist{feature, DistFamily::kLognormal, median, log_sigma};
}

FeatureDist tg_dist(const char* feature, double mean, double stddev) {
  return FeatureDist{feature, DistFamily::kGaussianTruncatedAtZero, mean,
                     stddev};
}

/// Parameters shared verbatim by every scenario; these events carry no
/// class signal by construction.
std::vector<FeatureDist> common_features() {
  return {
      ln_dist("CPU_CYCLES", 2500000, 0.20),
      ln_dist("INSTRUCTIONS", 1800000, 0.25),
      ln_dist("CACHE_REFERENCES", 40000, 0.30),
      ln_dist("CACHE_MISSES", 9000, 0.35),
      ln_dist("BRANCH_MISSES", 15000, 0.30),
      ln_dist("BUS_CYCLES", 90000, 0.25),
      ln_dist("REF_CPU_CYCLES", 2400000, 0.20),
      ln_dist("BRANCH_INSTRUCTIONS", 350000, 0.25),
      tg_dist("CPU_CLOCK", 1000000, 30000),
      tg_dist("TASK_CLOCK", 980000, 30000),
      tg_dist("CONTEXT_SWITCHES", 1.5, 1.2),
      ln_dist("L1D_READ", 600000, 0.25),
      ln_dist("L1D_ACCESS", 800000, 0.25),
      ln_dist("L1D_MISS", 30000, 0.30),
      ln_dist("L1I_MISS", 12000, 0.30),
      ln_dist("LL_READ", 25000, 0.30),
      ln_dist("LL_WRITE", 8000, 0.30),
      ln_dist("LL_MISS", 6000, 0.35),
      ln_dist("DTLB_ACCESS", 500000, 0.25),
      ln_dist("DTLB_MISS", 2500, 0.30),
      ln_dist("ITLB_ACCESS", 300000, 0.25),
      ln_dist("ITLB_MISS", 800, 0.35),
      ln_dist("BPU_READ", 400000, 0.25),
  };
}

struct VaryingParams {
  FeatureDist ll_access;
  FeatureDist l1d_write;
  FeatureDist dtlb_write;
  FeatureDist dtlb_read;
  FeatureDist bpu_access;
  FeatureDist bpu_miss;
  FeatureDist page_faults;
};

ScenarioProfile make_profile(const std::string& name, ClassLabel label,
                             std::uint64_t seed, const VaryingParams& p) {
  ScenarioProfile profile;
  profile.name = name;
  profile.label = label;
  profile.seed = seed;
  // Emit in catalog order so generated traces line up with catalog().
  auto shared = common_features();
  auto pick = [&](const std::string& feature) -> const FeatureDist* {
    if (feature == "LL_ACCESS") return &p.ll_access;
    if (feature == "L1D_WRITE") return &p.l1d_write;
    if (feature == "DTLB_WRITE") return &p.dtlb_write;
    if (feature == "DTLB_READ") return &p.dtlb_read;
    if (feature == "BPU_ACCESS") return &p.bpu_access;
    if (feature == "BPU_MISS") return &p.bpu_miss;
    if (feature == "PAGE_FAULTS") return &p.page_faults;
    for (const auto& dist : shared) {
      if (dist.feature == feature) return &dist;
    }
    return nullptr;
  };
  for (const auto& spec : catalog()) {
    const FeatureDist* dist = pick(spec.name);
    if (dist == nullptr) {
      throw Error(ErrorCode::InvalidProfile,
                  "no parameters for catalog event " + spec.name);
    }
    FeatureDist named = *dist;
    named.feature = spec.name;
    profile.features.push_back(named);
  }
  validate_profile(profile);
  return profile;
}

}  // namespace

ProfileLibrary default_library() {
  ProfileLibrary lib;
  auto add = [&](const std::string& name, ClassLabel label, std::uint64_t seed,
                 const VaryingParams& p) {
    lib.profiles.emplace(name, make_profile(name, label, seed, p));
  };

  add("stress_c", ClassLabel::Benign, 101,
      {ln_dist("LL_ACCESS", 400, 0.35), ln_dist("L1D_WRITE", 3500, 0.35),
       ln_dist("DTLB_WRITE", 600, 0.35), ln_dist("DTLB_READ", 1500, 0.35),
       ln_dist("BPU_ACCESS", 4000, 0.35), ln_dist("BPU_MISS", 700, 0.35),
       tg_dist("PAGE_FAULTS", 2, 1.5)});
  add("stress_m", ClassLabel::Benign, 102,
      {ln_dist("LL_ACCESS", 900, 0.35), ln_dist("L1D_WRITE", 8000, 0.35),
       ln_dist("DTLB_WRITE", 1400, 0.35), ln_dist("DTLB_READ", 3000, 0.35),
       ln_dist("BPU_ACCESS", 4500, 0.35), ln_dist("BPU_MISS", 750, 0.35),
       ln_dist("PAGE_FAULTS", 490, 0.5)});
  add("stress_i", ClassLabel::Benign, 103,
      {ln_dist("LL_ACCESS", 550, 0.35), ln_dist("L1D_WRITE", 4500, 0.35),
       ln_dist("DTLB_WRITE", 800, 0.35), ln_dist("DTLB_READ", 2000, 0.35),
       ln_dist("BPU_ACCESS", 4200, 0.35), ln_dist("BPU_MISS", 720, 0.35),
       tg_dist("PAGE_FAULTS", 30, 8)});
  add("firefox", ClassLabel::Benign, 104,
      {ln_dist("LL_ACCESS", 1300, 0.40), ln_dist("L1D_WRITE", 10000, 0.40),
       ln_dist("DTLB_WRITE", 2000, 0.40), ln_dist("DTLB_READ", 4000, 0.40),
       ln_dist("BPU_ACCESS", 5000, 0.40), ln_dist("BPU_MISS", 900, 0.45),
       ln_dist("PAGE_FAULTS", 330, 0.7)});
  add("video", ClassLabel::Benign, 105,
      {ln_dist("LL_ACCESS", 700, 0.40), ln_dist("L1D_WRITE", 6000, 0.40),
       ln_dist("DTLB_WRITE", 1100, 0.40), ln_dist("DTLB_READ", 2500, 0.40),
       ln_dist("BPU_ACCESS", 5000, 0.40), ln_dist("BPU_MISS", 850, 0.45),
       tg_dist("PAGE_FAULTS", 12, 4)});
  add("mibench", ClassLabel::Benign, 106,
      {ln_dist("LL_ACCESS", 800, 0.45), ln_dist("L1D_WRITE", 6500, 0.45),
       ln_dist("DTLB_WRITE", 1200, 0.45), ln_dist("DTLB_READ", 2700, 0.45),
       ln_dist("BPU_ACCESS", 4600, 0.45), ln_dist("BPU_MISS", 780, 0.45),
       ln_dist("PAGE_FAULTS", 60, 0.6)});
  add("spectre_v1", ClassLabel::SpectreV1, 107,
      {ln_dist("LL_ACCESS", 60000, 0.25), ln_dist("L1D_WRITE", 27000, 0.25),
       ln_dist("DTLB_WRITE", 1800, 0.25), ln_dist("DTLB_READ", 1100, 0.25),
       ln_dist("BPU_ACCESS", 5000, 0.40), ln_dist("BPU_MISS", 900, 0.40),
       tg_dist("PAGE_FAULTS", 3, 2)});
  add("spectre_v2", ClassLabel::SpectreV2, 108,
      {ln_dist("LL_ACCESS", 60000, 0.25), ln_dist("L1D_WRITE", 200000, 0.25),
       ln_dist("DTLB_WRITE", 400, 0.25), ln_dist("DTLB_READ", 3600, 0.25),
       ln_dist("BPU_ACCESS", 5200, 0.40), ln_dist("BPU_MISS", 920, 0.40),
       tg_dist("PAGE_FAULTS", 3, 2)});
  add("spectre_v4", ClassLabel::SpectreV4, 109,
      {ln_dist("LL_ACCESS", 60000, 0.25), ln_dist("L1D_WRITE", 27000, 0.25),
       ln_dist("DTLB_WRITE", 1800, 0.25), ln_dist("DTLB_READ", 13000, 0.25),
       ln_dist("BPU_ACCESS", 5000, 0.40), ln_dist("BPU_MISS", 880, 0.40),
       tg_dist("PAGE_FAULTS", 3, 2)});
  add("meltdown", ClassLabel::Meltdown, 110,
      {ln_dist("LL_ACCESS", 60000, 0.25), ln_dist("L1D_WRITE", 200000, 0.25),
       ln_dist("DTLB_WRITE", 8000, 0.25), ln_dist("DTLB_READ", 3600, 0.25),
       ln_dist("BPU_ACCESS", 5200, 0.40), ln_dist("BPU_MISS", 950, 0.40),
       ln_dist("PAGE_FAULTS", 250, 0.5)});
  add("meltdown_fast", ClassLabel::Meltdown, 111,
      {ln_dist("LL_ACCESS", 60000, 0.25), ln_dist("L1D_WRITE", 200000, 0.25),
       ln_dist("DTLB_WRITE", 8000, 0.25), ln_dist("DTLB_READ", 3600, 0.25),
       ln_dist("BPU_ACCESS", 5100, 0.40), ln_dist("BPU_MISS", 940, 0.40),
       tg_dist("PAGE_FAULTS", 0, 0.4)});
  add("meltdown_nonull", ClassLabel::Meltdown, 112,
      {ln_dist("LL_ACCESS", 60000, 0.25), ln_dist("L1D_WRITE", 200000, 0.25),
       ln_dist("DTLB_WRITE", 8000, 0.25), ln_dist("DTLB_READ", 3600, 0.25),
       ln_dist("BPU_ACCESS", 5150, 0.40), ln_dist("BPU_MISS", 930, 0.40),
       tg_dist("PAGE_FAULTS", 0, 0.4)});
  add("spectre_v1_alt", ClassLabel::SpectreV1, 113,
      {ln_dist("LL_ACCESS", 52000, 0.25), ln_dist("L1D_WRITE", 24000, 0.25),
       ln_dist("DTLB_WRITE", 1600, 0.25), ln_dist("DTLB_READ", 1000, 0.25),
       ln_dist("BPU_ACCESS", 4900, 0.40), ln_dist("BPU_MISS", 890, 0.40),
       tg_dist("PAGE_FAULTS", 3, 2)});

  lib.train_counts = {
      {"stress_c", 15000},  {"stress_m", 15000},        {"stress_i", 15000},
      {"firefox", 20000},   {"video", 20000},           {"spectre_v1", 11024},
      {"spectre_v2", 10305},{"meltdown", 10664},        {"meltdown_fast", 10598},
      {"meltdown_nonull", 10564},                       {"spectre_v4", 14001},
  };
  lib.validation_counts = {
      {"stress_c", 3000},
      {"stress_m", 3000},
      {"mibench", 5089},
      {"spectre_v1_alt", 23749},
  };
  return lib;
}

namespace {

std::size_t scenario_index(const std::string& name) {
  const auto& order = scenario_order();
  auto it = std::find(order.begin(), order.end(), name);
  if (it == order.end()) {
    throw Error(ErrorCode::InvalidProfile, "scenario outside catalog: " + name);
  }
  return static_cast<std::size_t>(it - order.begin());
}

/// Train and validation streams live in disjoint halves of the derivation
/// space so either seed can change without touching the other corpus.
std::uint64_t scenario_seed(std::uint64_t master, std::size_t index,
                            bool validation) {
  return mix_seed(master, (validation ? 1000 : 0) + index);
}

std::pair<Dataset, DatasetManifest> assemble(
    const ProfileLibrary& library,
    const std::map<std::string, std::size_t>& counts, std::uint64_t master,
    bool validation) {
  Dataset all;
  DatasetManifest manifest;
  manifest.seed = master;
  bool first = true;
  for (const auto& name : scenario_order()) {
    auto it = counts.find(name);
    if (it == counts.end() || it->second == 0) continue;
    const ScenarioProfile& profile = library.at(name);
    std::uint64_t seed = scenario_seed(master, scenario_index(name), validation);
    // Validation reuses stress scenarios; a distinct pid marks the fresh
    // process instance.
    std::int64_t pid = profile_pid(profile) + (validation ? 1 : 0);
    Dataset part = generate_with_seed(profile, it->second, seed, pid);
    if (first) {
      all.feature_names = part.feature_names;
      first = false;
    } else if (all.feature_names != part.feature_names) {
      throw Error(ErrorCode::SchemaMismatch,
                  "profiles disagree on feature order");
    }
    manifest.scenarios.push_back(
        {name, profile.label, it->second, pid, seed});
    manifest.class_counts[std::string(class_name(profile.label))] +=
        it->second;
    all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
  }
  manifest.rows = all.rows.size();
  manifest.feature_names = all.feature_names;
  return {std::move(all), std::move(manifest)};
}

}  // namespace

CorpusBuild build_corpus(const ProfileLibrary& library, std::uint64_t seed,
                         std::uint64_t validation_seed) {
  CorpusBuild build;
  auto [train, train_manifest] =
      assemble(library, library.train_counts, seed, false);
  auto [validation, validation_manifest] =
      assemble(library, library.validation_counts, validation_seed, true);
  build.train_test = std::move(train);
  build.validation = std::move(validation);
  build.train_manifest = std::move(train_manifest);
  build.validation_manifest = std::move(validation_manifest);
  return build;
}

ProfileLibrary calibrate_from_traces(
    const std::map<std::string, Dataset>& by_scenario) {
  ProfileLibrary lib;
  for (const auto& [name, data] : by_scenario) {
    if (data.rows.size() < 100) {
      throw Error(ErrorCode::TooFewRows,
                  "scenario " + name + " has " +
                      std::to_string(data.rows.size()) +
                      " rows, need at least 100");
    }
    data.check_consistent();
    ScenarioProfile profile;
    profile.name = name;
    if (!data.rows.front().label) {
      throw Error(ErrorCode::UnlabeledData,
                  "scenario " + name + " rows carry no label");
    }
    profile.label = *data.rows.front().label;
    profile.seed = fnv1a64(name) % 100000;

    const std::size_t n = data.rows.size();
    for (std::size_t j = 0; j < data.width(); ++j) {
      bool any_zero = false;
      for (const auto& row : data.rows) {
        if (row.values[j] == 0) {
          any_zero = true;
          break;
        }
      }
      FeatureDist dist;
      dist.feature = data.feature_names[j];
      if (any_zero) {
        dist.family = DistFamily::kGaussianTruncatedAtZero;
        double mean = 0.0;
        for (const auto& row : data.rows) {
          mean += static_cast<double>(row.values[j]);
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& row : data.rows) {
          double d = static_cast<double>(row.values[j]) - mean;
          var += d * d;
        }
        dist.location = mean;
        dist.scale = std::sqrt(var / static_cast<double>(n));
      } else {
        dist.family = DistFamily::kLognormal;
        double mean_log = 0.0;
        for (const auto& row : data.rows) {
          mean_log += std::log(static_cast<double>(row.values[j]));
        }
        mean_log /= static_cast<double>(n);
        double var_log = 0.0;
        for (const auto& row : data.rows) {
          double d = std::log(static_cast<double>(row.values[j])) - mean_log;
          var_log += d * d;
        }
        dist.location = std::exp(mean_log);
        dist.scale = std::sqrt(var_log / static_cast<double>(n));
      }
      profile.features.push_back(std::move(dist));
    }
    validate_profile(profile);
    lib.profiles.emplace(name, std::move(profile));
  }
  return lib;
}

namespace {

json dist_to_json(const FeatureDist& dist) {
  return json{{"name", dist.feature},
              {"family", dist_family_name(dist.family)},
              {"location", dist.location},
              {"scale", dist.scale}};
}

FeatureDist dist_from_json(const json& j) {
  FeatureDist dist;
  dist.feature = j.at("name").get<std::string>();
  dist.family = dist_family_from_name(j.at("family").get<std::string>());
  dist.location = j.at("location").get<double>();
  dist.scale = j.at("scale").get<double>();
  return dist;
}

}  // namespace

std::string library_to_json(const ProfileLibrary& library) {
  json root;
  root["kind"] = "profile-library";
  root["format_version"] = 1;
  json profiles = json::array();
  for (const auto& name : scenario_order()) {
    auto it = library.profiles.find(name);
    if (it == library.profiles.end()) continue;
    const ScenarioProfile& p = it->second;
    json features = json::array();
    for (const auto& dist : p.features) features.push_back(dist_to_json(dist));
    profiles.push_back(json{{"name", p.name},
                            {"label", static_cast<int>(p.label)},
                            {"seed", p.seed},
                            {"features", features}});
  }
  // Profiles outside the standard scenario set keep name order.
  for (const auto& [name, p] : library.profiles) {
    const auto& order = scenario_order();
    if (std::find(order.begin(), order.end(), name) != order.end()) continue;
    json features = json::array();
    for (const auto& dist : p.features) features.push_back(dist_to_json(dist));
    profiles.push_back(json{{"name", p.name},
                            {"label", static_cast<int>(p.label)},
                            {"seed", p.seed},
                            {"features", features}});
  }
  root["profiles"] = profiles;
  root["train_counts"] = library.train_counts;
  root["validation_counts"] = library.validation_counts;
  return root.dump(2) + "\n";
}

ProfileLibrary library_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidProfile,
                std::string("profile library parse error: ") + e.what());
  }
  try {
    if (root.at("kind").get<std::string>() != "profile-library") {
      throw Error(ErrorCode::InvalidProfile, "not a profile library file");
    }
    if (root.at("format_version").get<int>() != 1) {
      throw Error(ErrorCode::VersionMismatch,
                  "unsupported profile library version");
    }
    ProfileLibrary lib;
    for (const auto& pj : root.at("profiles")) {
      ScenarioProfile p;
      p.name = pj.at("name").get<std::string>();
      p.label = class_from_int(pj.at("label").get<int>());
      p.seed = pj.at("seed").get<std::uint64_t>();
      for (const auto& fj : pj.at("features")) {
        p.features.push_back(dist_from_json(fj));
      }
      validate_profile(p);
      lib.profiles.emplace(p.name, std::move(p));
    }
    if (root.contains("train_counts")) {
      lib.train_counts =
          root.at("train_counts").get<std::map<std::string, std::size_t>>();
    }
    if (root.contains("validation_counts")) {
      lib.validation_counts = root.at("validation_counts")
                                  .get<std::map<std::string, std::size_t>>();
    }
    return lib;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidProfile,
                std::string("profile library field error: ") + e.what());
  }
}

void save_library(const std::string& path, const ProfileLibrary& library) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  out << library_to_json(library);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

ProfileLibrary load_library(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return library_from_json(buf.str());
}

std::string DatasetManifest::to_json() const {
  json root;
  root["kind"] = "dataset-manifest";
  root["format_version"] = 1;
  root["seed"] = seed;
  json scen = json::array();
  for (const auto& s : scenarios) {
    scen.push_back(json{{"name", s.name},
                        {"label", static_cast<int>(s.label)},
                        {"rows", s.rows},
                        {"pid", s.pid},
                        {"seed", s.seed}});
  }
  root["scenarios"] = scen;
  root["class_counts"] = class_counts;
  root["rows"] = rows;
  root["features"] = feature_names;
  root["trace_file"] = trace_file;
  root["trace_hash_fnv1a64"] = trace_hash;
  return root.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  try {
    json root = json::parse(text);
    if (root.at("kind").get<std::string>() != "dataset-manifest") {
      throw Error(ErrorCode::SchemaMismatch, "not a dataset manifest");
    }
    DatasetManifest m;
    m.seed = root.at("seed").get<std::uint64_t>();
    for (const auto& sj : root.at("scenarios")) {
      m.scenarios.push_back({sj.at("name").get<std::string>(),
                             class_from_int(sj.at("label").get<int>()),
                             sj.at("rows").get<std::size_t>(),
                             sj.at("pid").get<std::int64_t>(),
                             sj.at("seed").get<std::uint64_t>()});
    }
    m.class_counts =
        root.at("class_counts").get<std::map<std::string, std::size_t>>();
    m.rows = root.at("rows").get<std::size_t>();
    m.feature_names = root.at("features").get<std::vector<std::string>>();
    m.trace_file = root.at("trace_file").get<std::string>();
    m.trace_hash = root.at("trace_hash_fnv1a64").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch,
                std::string("dataset manifest parse error: ") + e.what());
  }
}

}  // namespace hpcd
