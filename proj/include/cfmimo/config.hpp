#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfmimo/netmodel.hpp"

namespace cfmimo {

enum class Variant { CentralizedLsf, CentralizedBsr, DistributedLsf, DistributedBsr };
enum class Teacher { Lsf, Bsr };

bool is_centralized(Variant v);
Teacher teacher_of(Variant v);
std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);
std::string teacher_name(Teacher t);

/// Knobs of the teacher heuristics and precoding beyond SystemParams.
struct GenOptions {
  int min_links = 2;        // BSR minimum serving antennas per UE
  bool bsr_rho_sqrt = true; // per-link rate uses sqrt(rho_f) as printed
  double zf_reg = 1e-9;
};

/// Ordered key=value pairs; '#'-prefixed lines and blanks are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::istream& is, const std::string& origin);
KeyValues parse_key_value_file(const std::string& path);

/// Scenario file: flat key=value with keys L, N, K, area_side, sigma_w2, tau,
/// precoder, snr_levels_db (comma-separated), pl.exponent, pl.ref_distance,
/// pl.shadow_sigma_db, pl.min_distance, master_seed.
struct ScenarioConfig {
  SystemParams params;
  std::uint64_t master_seed = 0;
};

ScenarioConfig scenario_from_kv(const KeyValues& kv, const std::string& origin);
ScenarioConfig load_scenario(const std::string& path);
KeyValues scenario_to_kv(const ScenarioConfig& scenario);

/// Resolved run configuration for the CLI: the scenario plus experiment,
/// training and output settings.
struct RunConfig {
  std::string scenario_path;
  SystemParams params;
  std::uint64_t master_seed = 0;

  std::optional<Variant> variant;  // unset = all four
  int n_instances = 6000;
  int kfold = 5;
  GenOptions gen;

  int batch_size = 64;
  int epochs = 100;
  std::uint64_t shuffle_seed = 0;
  int early_stop_patience = 10;
  double holdout_fraction = 0.1;
  bool per_ue_models = false;

  std::string output_dir = "out";
  int threads = 1;
  int bench_trials = 30;

  std::vector<Variant> variants() const;
  void validate() const;
};

RunConfig load_run_config(const std::string& path);

/// Canonical echo of every resolved setting, one key=value per line; its
/// FNV-1a hash stamps all emitted CSVs.
std::string config_echo(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace cfmimo
