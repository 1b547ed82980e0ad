// Experiment configuration shared by the CLI and the acceptance pipelines.
// Serialized as JSON; a config file only needs the keys it overrides.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "crpca/admm.hpp"
#include "crpca/radar.hpp"
#include "crpca/trainer.hpp"

namespace crpca {

enum class ModelKind { gaussian, sfcw };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ExperimentConfig {
  ModelKind model = ModelKind::gaussian;
  /// Gaussian data shape; the sfcw model takes its shape from `radar`.
  Index M = 30;
  Index N = 30;
  /// Retained fraction K/MN in percent. K = round(ratio * MN).
  double compression_percent = 50.0;
  /// Optional explicit K; must agree with compression_percent when both are
  /// given. Zero derives K from the ratio.
  Index K = 0;
  Index rank_r = 2;
  Index sparsity_s = 27;
  radar::RadarConfig radar;
  double snr_db = 20.0;
  /// rho_init 1 instead of the solver's 1e-2, which thresholds unit-norm
  /// scenes to zero.
  SolverConfig solver = [] {
    SolverConfig c;
    c.rho_init = 1.0;
    return c;
  }();
  TrainConfig train;
  /// Decay of the trained model (and of its matched initialization).
  DecayKind train_decay = DecayKind::log_det;
  std::uint64_t seed = 1;
  Index train_count = 500;
  Index test_count = 1200;
  std::string output_dir = "out";

  Shape data_shape() const;
  Index measurements() const;
  /// Throws std::invalid_argument.
  void validate() const;
};

std::string to_json(const ExperimentConfig& config);
/// Parses `text` over the defaults. Unknown keys and type errors throw
/// std::invalid_argument.
ExperimentConfig config_from_json(std::string_view text, ExperimentConfig base = {});

/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace crpca
