// T-layer unfolding of the reweighted ADMM iteration. Layer t carries its own
// scalars (lambda_S, lambda_L, gamma, rho); the four linear maps are tied
// across layers and fixed to the measurement operators:
//   W1 = A_l^*, W2 = A_s, W3 = A_s^*, W4 = A_l.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crpca/admm.hpp"
#include "crpca/gaussian_model.hpp"
#include "crpca/operators.hpp"

namespace crpca {

struct LayerParams {
  double lambda_S = 1.0;
  double lambda_L = 1.0;
  double gamma = 1.0;
  double rho = 1.0;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct EpochRecord {
  Index epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainingMeta {
  std::vector<EpochRecord> history;
  std::uint64_t seed = 0;
  Index best_epoch = 0;
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
};

struct UnfoldedModel {
  std::vector<LayerParams> layers;
  DecayKind decay_kind = DecayKind::constant;
  MeasurementOperators ops;
  TrainingMeta meta;

  Index num_layers() const { return static_cast<Index>(layers.size()); }
  /// Throws std::invalid_argument unless T >= 1 and all scalars are
  /// finite and strictly positive.
  void validate() const;
};

/// One training/evaluation example.
struct Sample {
  CVector y;
  Scene scene;
};

struct Estimate {
  CMatrix L;
  CMatrix S;
};

/// Layer scalars reproducing `num_layers` iterations of admm_solve with the
/// given config: lambda^t = lambda / rho_t, gamma^t = gamma, and rho_t from
/// the continuation rule. Requires decay_l and decay_s to share kind and
/// gamma.
UnfoldedModel matched_model(const MeasurementOperators& ops, const SolverConfig& config,
                            Index num_layers);

Estimate forward(const UnfoldedModel& model, const CVector& y);

/// Forward pass for a batch whose columns are measurement vectors.
std::vector<Estimate> forward_batch(const UnfoldedModel& model, const CMatrix& ys);

/// 1/2 ||L^ - L||^2/||L||^2 + 1/2 ||S^ - S||^2/||S||^2.
double sample_loss(const Estimate& estimate, const Scene& truth);

/// Mean sample_loss over the batch. Throws on zero-norm ground truth.
double loss(const UnfoldedModel& model, std::span<const Sample> batch);

/// Column-stacks the measurement vectors of a batch.
CMatrix stack_measurements(std::span<const Sample> batch);

}  // namespace crpca
