#ifndef HPCD_PROFILES_HPP_
#define HPCD_PROFILES_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpcd/synth.hpp"

namespace hpcd {

/// Scenario catalog used by corpus assembly, manifest emission, and per-
/// scenario seed derivation. Order is load-bearing: seeds derive from the
/// position here.
const std::vector<std::string>& scenario_order();

struct ProfileLibrary {
  std::map<std::string, ScenarioProfile> profiles;
  std::map<std::string, std::size_t> train_counts;
  std::map<std::string, std::size_t> validation_counts;

  const ScenarioProfile& at(const std::string& name) const;
};

/// Shipped library: every scenario emits all 30 catalog events. The four
/// events the pipeline is expected to keep carry the class structure
/// (LL_ACCESS benign vs attack, L1D_WRITE v1/v4 vs v2/meltdown, DTLB_WRITE
/// v2 vs meltdown, DTLB_READ v1 vs v4); BPU_ACCESS/BPU_MISS overlap across
/// benign and spectre scenarios on purpose; PAGE_FAULTS is large for
/// meltdown, firefox and stress_m, zero-centered for meltdown_fast and
/// meltdown_nonull; the rest share one set of parameters everywhere.
ProfileLibrary default_library();

struct ScenarioProvenance {
  std::string name;
  ClassLabel label = ClassLabel::Benign;
  std::size_t rows = 0;
  std::int64_t pid = 0;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<ScenarioProvenance> scenarios;
  std::map<std::string, std::size_t> class_counts;
  std::size_t rows = 0;
  std::vector<std::string> feature_names;
  std::string trace_file;
  std::string trace_hash;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
};

struct CorpusBuild {
  Dataset train_test;
  Dataset validation;
  DatasetManifest train_manifest;
  DatasetManifest validation_manifest;
};

/// Assembles the train/test corpus from train_counts under `seed` and the
/// validation corpus (fresh stress draws, mibench, spectre_v1_alt) under
/// `validation_seed`; the two RNG streams are derived disjointly, so
/// changing one seed never perturbs the other corpus.
CorpusBuild build_corpus(const ProfileLibrary& library, std::uint64_t seed,
                         std::uint64_t validation_seed);

/// Refits per-feature parameters by method of moments on log-transformed
/// values; any zero forces the truncated-gaussian fallback for that
/// feature. Requires >= 100 rows per scenario (TooFewRows otherwise) and a
/// label on every row.
ProfileLibrary calibrate_from_traces(
    const std::map<std::string, Dataset>& by_scenario);

std::string library_to_json(const ProfileLibrary& library);
ProfileLibrary library_from_json(const std::string& text);
void save_library(const std::string& path, const ProfileLibrary& library);
ProfileLibrary load_library(const std::string& path);

}  // namespace hpcd

#endif  // HPCD_PROFILES_HPP_
