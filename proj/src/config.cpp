#include "cfmimo/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cfmimo/csv.hpp"

namespace cfmimo {

bool is_centralized(Variant v) {
  return v == Variant::CentralizedLsf || v == Variant::CentralizedBsr;
}

Teacher teacher_of(Variant v) {
  return (v == Variant::CentralizedLsf || v == Variant::DistributedLsf) ? Teacher::Lsf
                                                                        : Teacher::Bsr;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::CentralizedLsf: return "centralized_lsf";
    case Variant::CentralizedBsr: return "centralized_bsr";
    case Variant::DistributedLsf: return "distributed_lsf";
    case Variant::DistributedBsr: return "distributed_bsr";
  }
  throw std::logic_error("unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "centralized_lsf") return Variant::CentralizedLsf;
  if (name == "centralized_bsr") return Variant::CentralizedBsr;
  if (name == "distributed_lsf") return Variant::DistributedLsf;
  if (name == "distributed_bsr") return Variant::DistributedBsr;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected centralized_lsf, centralized_bsr, "
                              "distributed_lsf or distributed_bsr)");
}

std::string teacher_name(Teacher t) { return t == Teacher::Lsf ? "lsf" : "bsr"; }

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

class KvReader {
 public:
  KvReader(const KeyValues& kv, std::string origin) : origin_(std::move(origin)) {
    for (const auto& [key, value] : kv) {
      if (!map_.emplace(key, value).second) {
        throw std::invalid_argument(origin_ + ": duplicate key '" + key + "'");
      }
    }
  }

  std::optional<std::string> get(const std::string& key) {
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v) throw std::invalid_argument(origin_ + ": missing key '" + key + "'");
    return *v;
  }

  double get_double(const std::string& key, double fallback) {
    auto v = get(key);
    return v ? parse_double(*v) : fallback;
  }

  int get_int(const std::string& key, int fallback) {
    auto v = get(key);
    if (!v) return fallback;
    return static_cast<int>(std::stol(*v));
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    auto v = get(key);
    if (!v) return fallback;
    return std::stoull(*v);
  }

  bool get_bool(const std::string& key, bool fallback) {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw std::invalid_argument(origin_ + ": key '" + key + "' expects true/false");
  }

  void reject_unknown() const {
    for (const auto& [key, value] : map_) {
      (void)value;
      if (!used_.count(key)) {
        throw std::invalid_argument(origin_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  std::string origin_;
  std::map<std::string, std::string> map_;
  std::set<std::string> used_;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) throw std::invalid_argument(what + ": empty list entry");
    out.push_back(parse_double(cell));
  }
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

std::string format_double_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

KeyValues parse_key_values(std::istream& is, const std::string& origin) {
  KeyValues kv;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(line_no) +
                                  ": expected key=value, got '" + stripped + "'");
    }
    kv.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return kv;
}

KeyValues parse_key_value_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file: " + path);
  return parse_key_values(is, path);
}

ScenarioConfig scenario_from_kv(const KeyValues& kv, const std::string& origin) {
  KvReader r(kv, origin);
  ScenarioConfig sc;
  sc.params.ap_count = r.get_int("L", sc.params.ap_count);
  sc.params.antennas_per_ap = r.get_int("N", sc.params.antennas_per_ap);
  sc.params.ue_count = r.get_int("K", sc.params.ue_count);
  sc.params.area_side = r.get_double("area_side", sc.params.area_side);
  sc.params.sigma_w2 = r.get_double("sigma_w2", sc.params.sigma_w2);
  sc.params.tau = r.get_double("tau", sc.params.tau);
  if (auto p = r.get("precoder")) {
    if (*p == "zf") {
      sc.params.precoder = PrecoderMode::Zf;
    } else if (*p == "mrt") {
      sc.params.precoder = PrecoderMode::Mrt;
    } else {
      throw std::invalid_argument(origin + ": precoder must be zf or mrt");
    }
  }
  if (auto s = r.get("snr_levels_db")) {
    sc.params.snr_levels_db = parse_double_list(*s, origin + ": snr_levels_db");
  }
  sc.params.pl.exponent = r.get_double("pl.exponent", sc.params.pl.exponent);
  sc.params.pl.ref_distance = r.get_double("pl.ref_distance", sc.params.pl.ref_distance);
  sc.params.pl.shadow_sigma_db = r.get_double("pl.shadow_sigma_db", sc.params.pl.shadow_sigma_db);
  sc.params.pl.min_distance = r.get_double("pl.min_distance", sc.params.pl.min_distance);
  sc.master_seed = r.get_u64("master_seed", 0);
  r.reject_unknown();
  sc.params.validate();
  return sc;
}

ScenarioConfig load_scenario(const std::string& path) {
  return scenario_from_kv(parse_key_value_file(path), path);
}

KeyValues scenario_to_kv(const ScenarioConfig& sc) {
  const SystemParams& p = sc.params;
  KeyValues kv;
  kv.emplace_back("L", std::to_string(p.ap_count));
  kv.emplace_back("N", std::to_string(p.antennas_per_ap));
  kv.emplace_back("K", std::to_string(p.ue_count));
  kv.emplace_back("area_side", format_double(p.area_side));
  kv.emplace_back("sigma_w2", format_double(p.sigma_w2));
  kv.emplace_back("tau", format_double(p.tau));
  kv.emplace_back("precoder", p.precoder == PrecoderMode::Zf ? "zf" : "mrt");
  kv.emplace_back("snr_levels_db", format_double_list(p.snr_levels_db));
  kv.emplace_back("pl.exponent", format_double(p.pl.exponent));
  kv.emplace_back("pl.ref_distance", format_double(p.pl.ref_distance));
  kv.emplace_back("pl.shadow_sigma_db", format_double(p.pl.shadow_sigma_db));
  kv.emplace_back("pl.min_distance", format_double(p.pl.min_distance));
  kv.emplace_back("master_seed", std::to_string(sc.master_seed));
  return kv;
}

std::vector<Variant> RunConfig::variants() const {
  if (variant) return {*variant};
  return {Variant::CentralizedLsf, Variant::CentralizedBsr, Variant::DistributedLsf,
          Variant::DistributedBsr};
}

void RunConfig::validate() const {
  params.validate();
  if (n_instances < 1) throw std::invalid_argument("n_instances must be >= 1");
  if (n_instances % static_cast<int>(params.snr_levels_db.size()) != 0) {
    throw std::invalid_argument("n_instances must divide evenly across the " +
                                std::to_string(params.snr_levels_db.size()) + " SNR levels");
  }
  if (kfold < 2) throw std::invalid_argument("kfold must be >= 2");
  if (kfold > n_instances) throw std::invalid_argument("kfold exceeds instance count");
  if (gen.min_links < 1 || gen.min_links > params.total_antennas()) {
    throw std::invalid_argument("min_links must be in [1, M]");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (early_stop_patience < 0) throw std::invalid_argument("early_stop_patience must be >= 0");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw std::invalid_argument("holdout_fraction must be in [0, 1)");
  }
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
  if (bench_trials < 1) throw std::invalid_argument("bench_trials must be >= 1");
  if (output_dir.empty()) throw std::invalid_argument("output_dir must be set");
}

RunConfig load_run_config(const std::string& path) {
  KvReader r(parse_key_value_file(path), path);
  RunConfig cfg;
  cfg.scenario_path = r.require("scenario");
  // Scenario paths are relative to the run config file.
  if (!cfg.scenario_path.empty() && cfg.scenario_path[0] != '/') {
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) {
      cfg.scenario_path = path.substr(0, slash + 1) + cfg.scenario_path;
    }
  }
  const ScenarioConfig sc = load_scenario(cfg.scenario_path);
  cfg.params = sc.params;
  cfg.master_seed = r.get_u64("master_seed", sc.master_seed);

  if (auto v = r.get("variant")) {
    if (*v != "all") cfg.variant = variant_from_name(*v);
  }
  if (auto t = r.get("teacher")) {
    // Redundant with the variant; kept as a cross-check.
    if (cfg.variant && *t != teacher_name(teacher_of(*cfg.variant))) {
      throw std::invalid_argument(path + ": teacher '" + *t + "' does not match variant '" +
                                  variant_name(*cfg.variant) + "'");
    }
    if (*t != "lsf" && *t != "bsr") {
      throw std::invalid_argument(path + ": teacher must be lsf or bsr");
    }
  }
  cfg.n_instances = r.get_int("n_instances", cfg.n_instances);
  cfg.kfold = r.get_int("kfold", cfg.kfold);
  cfg.gen.min_links = r.get_int("min_links", cfg.gen.min_links);
  cfg.gen.bsr_rho_sqrt = r.get_bool("bsr_rho_sqrt", cfg.gen.bsr_rho_sqrt);
  cfg.gen.zf_reg = r.get_double("zf_reg", cfg.gen.zf_reg);
  cfg.batch_size = r.get_int("batch_size", cfg.batch_size);
  cfg.epochs = r.get_int("epochs", cfg.epochs);
  cfg.shuffle_seed = r.get_u64("shuffle_seed", cfg.shuffle_seed);
  cfg.early_stop_patience = r.get_int("early_stop_patience", cfg.early_stop_patience);
  cfg.holdout_fraction = r.get_double("holdout_fraction", cfg.holdout_fraction);
  cfg.per_ue_models = r.get_bool("per_ue_models", cfg.per_ue_models);
  cfg.output_dir = r.get("output_dir").value_or(cfg.output_dir);
  cfg.threads = r.get_int("threads", cfg.threads);
  cfg.bench_trials = r.get_int("bench_trials", cfg.bench_trials);
  r.reject_unknown();
  cfg.validate();
  return cfg;
}

std::string config_echo(const RunConfig& cfg) {
  ScenarioConfig sc{cfg.params, cfg.master_seed};
  std::string out;
  for (const auto& [key, value] : scenario_to_kv(sc)) {
    out += key + "=" + value + "\n";
  }
  out += "variant=" + (cfg.variant ? variant_name(*cfg.variant) : std::string("all")) + "\n";
  out += "n_instances=" + std::to_string(cfg.n_instances) + "\n";
  out += "kfold=" + std::to_string(cfg.kfold) + "\n";
  out += "min_links=" + std::to_string(cfg.gen.min_links) + "\n";
  out += "bsr_rho_sqrt=" + std::string(cfg.gen.bsr_rho_sqrt ? "true" : "false") + "\n";
  out += "zf_reg=" + format_double(cfg.gen.zf_reg) + "\n";
  out += "batch_size=" + std::to_string(cfg.batch_size) + "\n";
  out += "epochs=" + std::to_string(cfg.epochs) + "\n";
  out += "shuffle_seed=" + std::to_string(cfg.shuffle_seed) + "\n";
  out += "early_stop_patience=" + std::to_string(cfg.early_stop_patience) + "\n";
  out += "holdout_fraction=" + format_double(cfg.holdout_fraction) + "\n";
  out += "per_ue_models=" + std::string(cfg.per_ue_models ? "true" : "false") + "\n";
  out += "bench_trials=" + std::to_string(cfg.bench_trials) + "\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(config_echo(cfg)); }

}  // namespace cfmimo
