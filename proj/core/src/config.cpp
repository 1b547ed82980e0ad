#include "crpca/config.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>

#include "json.hpp"

namespace crpca {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::gaussian ? "gaussian" : "sfcw";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "gaussian") return ModelKind::gaussian;
  if (text == "sfcw" || text == "radar") return ModelKind::sfcw;
  throw std::invalid_argument("unknown model '" + std::string(text) + "'");
}

Shape ExperimentConfig::data_shape() const {
  if (model == ModelKind::sfcw) {
    return {radar.num_antennas, radar.num_freqs};
  }
  return {M, N};
}

Index ExperimentConfig::measurements() const {
  if (K > 0) return K;
  return static_cast<Index>(std::llround(compression_percent / 100.0 *
                                         static_cast<double>(data_shape().size())));
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (model == ModelKind::sfcw) {
    radar.validate();
  } else {
    if (M < 1 || N < 1) fail("M and N must be positive");
    if (rank_r < 1 || rank_r > std::min(M, N)) fail("rank_r must lie in [1, min(M,N)]");
    if (sparsity_s < 1 || sparsity_s > M * N) fail("sparsity_s must lie in [1, MN]");
  }
  if (!(compression_percent > 0.0 && compression_percent <= 100.0)) {
    fail("compression_percent must lie in (0, 100]");
  }
  const Index mn = data_shape().size();
  const Index from_ratio =
      static_cast<Index>(std::llround(compression_percent / 100.0 * static_cast<double>(mn)));
  if (K < 0 || K > mn) fail("K must lie in [1, MN]");
  if (K > 0 && K != from_ratio) {
    fail("K=" + std::to_string(K) + " disagrees with compression_percent (round gives " +
         std::to_string(from_ratio) + ")");
  }
  if (measurements() < 1) fail("compression too small: K rounds to 0");
  if (std::isnan(snr_db)) fail("snr_db is NaN");
  if (train_count < 0 || test_count < 0) fail("sample counts must be nonnegative");
  solver.validate();
  train.validate();
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
    }
  }
}

template <class Enum, class Parse>
void take_enum(const json& j, const char* key, Enum& out, Parse parse) {
  if (j.contains(key)) {
    std::string text;
    take(j, key, text);
    out = parse(text);
  }
}

json solver_json(const SolverConfig& s) {
  return {{"lambda_L", s.lambda_L},
          {"lambda_S", s.lambda_S},
          {"decay", std::string(to_string(s.decay_l.kind))},
          {"gamma", s.decay_l.gamma},
          {"rho_init", s.rho_init},
          {"rho_growth", s.rho_growth},
          {"rho_max", s.rho_max},
          {"epsilon", s.epsilon},
          {"max_iters", s.max_iters},
          {"adjoint", std::string(to_string(s.adjoint_mode))}};
}

void solver_from(const json& j, SolverConfig& s) {
  check_keys(j, {"lambda_L", "lambda_S", "decay", "gamma", "rho_init", "rho_growth", "rho_max",
                 "epsilon", "max_iters", "adjoint"},
             "solver");
  take(j, "lambda_L", s.lambda_L);
  take(j, "lambda_S", s.lambda_S);
  DecaySpec d = s.decay_l;
  take_enum(j, "decay", d.kind, parse_decay_kind);
  take(j, "gamma", d.gamma);
  s.decay_l = d;
  s.decay_s = d;
  take(j, "rho_init", s.rho_init);
  take(j, "rho_growth", s.rho_growth);
  take(j, "rho_max", s.rho_max);
  take(j, "epsilon", s.epsilon);
  take(j, "max_iters", s.max_iters);
  take_enum(j, "adjoint", s.adjoint_mode, parse_adjoint_mode);
}

json train_json(const TrainConfig& t) {
  return {{"layers", t.num_layers},
          {"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"optimizer", std::string(to_string(t.optimizer))},
          {"step_size", t.step_size},
          {"perturbation", t.perturbation},
          {"gain_decay", t.gain_decay},
          {"perturbation_decay", t.perturbation_decay},
          {"gradient_averaging", t.gradient_averaging},
          {"max_log_step", t.max_log_step},
          {"blocking", t.blocking},
          {"block_tolerance", t.block_tolerance},
          {"validation_fraction", t.validation_fraction},
          {"seed", t.seed}};
}

void train_from(const json& j, TrainConfig& t) {
  check_keys(j, {"layers", "epochs", "batch_size", "optimizer", "step_size", "perturbation",
                 "gain_decay", "perturbation_decay", "gradient_averaging", "max_log_step",
                 "blocking", "block_tolerance", "validation_fraction", "seed"},
             "train");
  take(j, "layers", t.num_layers);
  take(j, "epochs", t.epochs);
  take(j, "batch_size", t.batch_size);
  take_enum(j, "optimizer", t.optimizer, parse_optimizer);
  take(j, "step_size", t.step_size);
  take(j, "perturbation", t.perturbation);
  take(j, "gain_decay", t.gain_decay);
  take(j, "perturbation_decay", t.perturbation_decay);
  take(j, "gradient_averaging", t.gradient_averaging);
  take(j, "max_log_step", t.max_log_step);
  take(j, "blocking", t.blocking);
  take(j, "block_tolerance", t.block_tolerance);
  take(j, "validation_fraction", t.validation_fraction);
  take(j, "seed", t.seed);
}

json radar_json(const radar::RadarConfig& r) {
  return {{"carrier_hz", r.carrier_hz},
          {"bandwidth_hz", r.bandwidth_hz},
          {"num_freqs", r.num_freqs},
          {"num_antennas", r.num_antennas},
          {"antenna_spacing_m", r.antenna_spacing_m},
          {"standoff_m", r.standoff_m},
          {"panel_width_m", r.panel_width_m},
          {"panel_height_m", r.panel_height_m},
          {"grid_cells", r.grid_cells},
          {"num_defects", r.num_defects},
          {"clutter_rank", r.clutter_rank},
          {"clutter_to_signal_db", r.clutter_to_signal_db},
          {"speed_of_light", r.speed_of_light}};
}

void radar_from(const json& j, radar::RadarConfig& r) {
  check_keys(j, {"carrier_hz", "bandwidth_hz", "num_freqs", "num_antennas", "antenna_spacing_m",
                 "standoff_m", "panel_width_m", "panel_height_m", "grid_cells", "num_defects",
                 "clutter_rank", "clutter_to_signal_db", "speed_of_light"},
             "radar");
  take(j, "carrier_hz", r.carrier_hz);
  take(j, "bandwidth_hz", r.bandwidth_hz);
  take(j, "num_freqs", r.num_freqs);
  take(j, "num_antennas", r.num_antennas);
  take(j, "antenna_spacing_m", r.antenna_spacing_m);
  take(j, "standoff_m", r.standoff_m);
  take(j, "panel_width_m", r.panel_width_m);
  take(j, "panel_height_m", r.panel_height_m);
  take(j, "grid_cells", r.grid_cells);
  take(j, "num_defects", r.num_defects);
  take(j, "clutter_rank", r.clutter_rank);
  take(j, "clutter_to_signal_db", r.clutter_to_signal_db);
  take(j, "speed_of_light", r.speed_of_light);
}

json config_json(const ExperimentConfig& c) {
  json snr = std::isinf(c.snr_db) ? json("inf") : json(c.snr_db);
  return {{"model", std::string(to_string(c.model))},
          {"M", c.M},
          {"N", c.N},
          {"compression_percent", c.compression_percent},
          {"K", c.measurements()},
          {"rank_r", c.rank_r},
          {"sparsity_s", c.sparsity_s},
          {"radar", radar_json(c.radar)},
          {"snr_db", snr},
          {"solver", solver_json(c.solver)},
          {"train", train_json(c.train)},
          {"train_decay", std::string(to_string(c.train_decay))},
          {"seed", c.seed},
          {"train_count", c.train_count},
          {"test_count", c.test_count},
          {"output_dir", c.output_dir}};
}

}  // namespace

std::string to_json(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"model", "M", "N", "compression_percent", "K", "rank_r", "sparsity_s", "radar",
                 "snr_db", "solver", "train", "train_decay", "seed", "train_count", "test_count",
                 "output_dir"},
             "config");
  take_enum(j, "model", c.model, parse_model_kind);
  take(j, "M", c.M);
  take(j, "N", c.N);
  take(j, "compression_percent", c.compression_percent);
  take(j, "K", c.K);
  take(j, "rank_r", c.rank_r);
  take(j, "sparsity_s", c.sparsity_s);
  if (j.contains("radar")) radar_from(j.at("radar"), c.radar);
  if (j.contains("snr_db")) {
    const json& s = j.at("snr_db");
    if (s.is_string() && s.get<std::string>() == "inf") {
      c.snr_db = std::numeric_limits<double>::infinity();
    } else {
      take(j, "snr_db", c.snr_db);
    }
  }
  if (j.contains("solver")) solver_from(j.at("solver"), c.solver);
  if (j.contains("train")) train_from(j.at("train"), c.train);
  take_enum(j, "train_decay", c.train_decay, parse_decay_kind);
  take(j, "seed", c.seed);
  take(j, "train_count", c.train_count);
  take(j, "test_count", c.test_count);
  take(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canonical = config_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace crpca
