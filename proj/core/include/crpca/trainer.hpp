// Gradient-free training of the per-layer scalars of an UnfoldedModel.
//
// All 4T scalars are optimized in log space, so they stay strictly positive.
// The optimizer is either SPSA (two loss evaluations per step regardless of
// the parameter count) or central finite differences (2 evaluations per
// trainable scalar). The last validation_fraction of the dataset is held out
// and the iterate with the best validation loss is returned.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "crpca/unfolded.hpp"

namespace crpca {

enum class TrainOptimizer { spsa, central_fd };

std::string_view to_string(TrainOptimizer opt);
TrainOptimizer parse_optimizer(std::string_view text);

struct TrainConfig {
  Index num_layers = 10;
  Index epochs = 100;
  Index batch_size = 50;
  TrainOptimizer optimizer = TrainOptimizer::spsa;
  /// Target size of the first update in log space; the SPSA gain is
  /// calibrated from the initial gradient magnitude to hit it.
  double step_size = 0.05;
  /// Log-space perturbation scale c.
  double perturbation = 0.05;
  /// Spall's decay exponents for the gain and perturbation sequences.
  double gain_decay = 0.602;
  double perturbation_decay = 0.101;
  /// Independent SPSA gradient estimates averaged per step.
  Index gradient_averaging = 1;
  /// Per-coordinate cap on a single log-space update.
  double max_log_step = 0.2;
  /// Reject a step when the batch loss at the new point exceeds
  /// (1 + block_tolerance) times the loss before the step. One extra loss
  /// evaluation per step. Keeps the iterate out of the all-zero plateau.
  bool blocking = true;
  double block_tolerance = 0.0;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Thrown when the loss becomes non-finite. Carries the best model seen so
/// far so callers can checkpoint it.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, UnfoldedModel best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const UnfoldedModel& best_model() const { return best_; }

 private:
  UnfoldedModel best_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Initializes from matched_model(ops, init, config.num_layers) and trains.
/// `init` supplies lambda_l, lambda_s, gamma, the rho schedule and the decay
/// kind (decay_l == decay_s required).
UnfoldedModel train(std::span<const Sample> dataset, const MeasurementOperators& ops,
                    const SolverConfig& init, const TrainConfig& config,
                    const EpochCallback& on_epoch = {});

/// Trains starting from an existing model.
UnfoldedModel train_from(UnfoldedModel model, std::span<const Sample> dataset,
                         const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace crpca
