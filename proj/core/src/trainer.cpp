#include "crpca/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace crpca {

std::string_view to_string(TrainOptimizer opt) {
  return opt == TrainOptimizer::spsa ? "spsa" : "central_fd";
}

TrainOptimizer parse_optimizer(std::string_view text) {
  if (text == "spsa") return TrainOptimizer::spsa;
  if (text == "central_fd" || text == "fd") return TrainOptimizer::central_fd;
  throw std::invalid_argument("unknown optimizer '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
  if (num_layers < 1) fail("num_layers must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(step_size > 0.0)) fail("step_size must be positive");
  if (!(perturbation > 0.0)) fail("perturbation must be positive");
  if (!(max_log_step > 0.0)) fail("max_log_step must be positive");
  if (gradient_averaging < 1) fail("gradient_averaging must be >= 1");
  if (!(block_tolerance >= 0.0)) fail("block_tolerance must be nonnegative");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    fail("validation_fraction must lie in [0, 1)");
  }
}

namespace {

constexpr double kLogBound = 30.0;
constexpr int kScalarsPerLayer = 4;

RVector to_log_params(const UnfoldedModel& model) {
  RVector theta(model.num_layers() * kScalarsPerLayer);
  for (Index t = 0; t < model.num_layers(); ++t) {
    const auto& p = model.layers[static_cast<std::size_t>(t)];
    theta(4 * t + 0) = std::log(p.lambda_S);
    theta(4 * t + 1) = std::log(p.lambda_L);
    theta(4 * t + 2) = std::log(p.gamma);
    theta(4 * t + 3) = std::log(p.rho);
  }
  return theta;
}

void assign_log_params(UnfoldedModel& model, const RVector& theta) {
  for (Index t = 0; t < model.num_layers(); ++t) {
    auto& p = model.layers[static_cast<std::size_t>(t)];
    p.lambda_S = std::exp(theta(4 * t + 0));
    p.lambda_L = std::exp(theta(4 * t + 1));
    p.gamma = std::exp(theta(4 * t + 2));
    p.rho = std::exp(theta(4 * t + 3));
  }
}

class Objective {
 public:
  Objective(UnfoldedModel model, std::span<const Sample> data)
      : model_(std::move(model)), data_(data) {}

  double operator()(const RVector& theta, const std::vector<std::size_t>& idx) {
    assign_log_params(model_, theta);
    CMatrix ys(model_.ops.measurements(), static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      ys.col(static_cast<Index>(i)) = data_[idx[i]].y;
    }
    std::vector<Estimate> est;
    try {
      est = forward_batch(model_, ys);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double total = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      total += sample_loss(est[i], data_[idx[i]].scene);
    }
    return total / static_cast<double>(idx.size());
  }

  UnfoldedModel model_at(const RVector& theta) const {
    UnfoldedModel m = model_;
    assign_log_params(m, theta);
    return m;
  }

 private:
  UnfoldedModel model_;
  std::span<const Sample> data_;
};

}  // namespace

UnfoldedModel train(std::span<const Sample> dataset, const MeasurementOperators& ops,
                    const SolverConfig& init, const TrainConfig& config,
                    const EpochCallback& on_epoch) {
  config.validate();
  return train_from(matched_model(ops, init, config.num_layers), dataset, config, on_epoch);
}

UnfoldedModel train_from(UnfoldedModel model, std::span<const Sample> dataset,
                         const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  model.validate();
  if (dataset.empty()) {
    throw std::invalid_argument("train: empty dataset");
  }
  const std::size_t n = dataset.size();
  std::size_t n_val = 0;
  if (n >= 2 && config.validation_fraction > 0.0) {
    n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(n))),
        1, n - 1);
  }
  std::vector<std::size_t> train_idx(n - n_val);
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::vector<std::size_t> val_idx(n_val);
  std::iota(val_idx.begin(), val_idx.end(), n - n_val);
  if (val_idx.empty()) {
    val_idx = train_idx;
  }

  Objective objective(model, dataset);
  RVector theta = to_log_params(model);
  const Index p = theta.size();
  RVector active = RVector::Ones(p);
  if (model.decay_kind == DecayKind::constant) {
    for (Index t = 0; t < model.num_layers(); ++t) {
      active(4 * t + 2) = 0.0;
    }
  }

  auto fail = [&](const std::string& what, const RVector& best) {
    throw TrainingDiverged("training diverged: " + what, objective.model_at(best));
  };

  RVector best_theta = theta;
  double best_val = objective(theta, val_idx);
  if (!std::isfinite(best_val)) {
    fail("initial validation loss is not finite", theta);
  }
  model.meta = {};
  model.meta.seed = config.seed;
  model.meta.initial_val_loss = best_val;
  model.meta.best_val_loss = best_val;
  if (config.epochs == 0) {
    return model;
  }

  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                                               train_idx.size());
  const std::size_t batches_per_epoch = (train_idx.size() + bs - 1) / bs;
  const double total_steps = static_cast<double>(batches_per_epoch) * static_cast<double>(config.epochs);
  const double stability = 0.1 * total_steps;

  Rng rng(config.seed);
  std::bernoulli_distribution coin(0.5);
  auto rademacher = [&]() {
    RVector d(p);
    for (Index i = 0; i < p; ++i) {
      d(i) = active(i) * (coin(rng) ? 1.0 : -1.0);
    }
    return d;
  };

  double evals_sum = 0.0;
  Index evals_count = 0;
  auto gradient = [&](const RVector& at, double c, const std::vector<std::size_t>& batch) {
    RVector g = RVector::Zero(p);
    auto record = [&](double fp, double fm) {
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        fail("non-finite loss during gradient estimation", best_theta);
      }
      evals_sum += fp + fm;
      evals_count += 2;
      return (fp - fm) / (2.0 * c);
    };
    if (config.optimizer == TrainOptimizer::spsa) {
      for (Index r = 0; r < config.gradient_averaging; ++r) {
        const RVector delta = rademacher();
        const double slope = record(objective(at + c * delta, batch), objective(at - c * delta, batch));
        g += slope * delta;
      }
      g /= static_cast<double>(config.gradient_averaging);
    } else {
      for (Index i = 0; i < p; ++i) {
        if (active(i) == 0.0) continue;
        RVector e = RVector::Zero(p);
        e(i) = c;
        g(i) = record(objective(at + e, batch), objective(at - e, batch));
      }
    }
    return g;
  };

  // Gain calibration on the first batch of the first epoch.
  std::vector<std::size_t> order = train_idx;
  std::shuffle(order.begin(), order.end(), rng);
  double gain = 0.0;
  {
    const std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<long>(bs));
    constexpr int kCalibrationDraws = 4;
    double mean_abs = 0.0;
    const int draws = config.optimizer == TrainOptimizer::spsa ? kCalibrationDraws : 1;
    for (int r = 0; r < draws; ++r) {
      const RVector g = gradient(theta, config.perturbation, first);
      mean_abs += g.cwiseAbs().sum() / std::max(1.0, active.sum());
    }
    mean_abs /= draws;
    const double scale = std::pow(stability + 1.0, config.gain_decay);
    gain = mean_abs > 0.0 ? config.step_size * scale / mean_abs : config.step_size * scale;
  }

  Index step = 0;
  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    if (epoch > 1) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    evals_sum = 0.0;
    evals_count = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t stop = std::min(order.size(), start + bs);
      const std::vector<std::size_t> batch(order.begin() + static_cast<long>(start),
                                           order.begin() + static_cast<long>(stop));
      const double k = static_cast<double>(step);
      const double a_k = gain / std::pow(k + 1.0 + stability, config.gain_decay);
      const double c_k = config.perturbation / std::pow(k + 1.0, config.perturbation_decay);
      const RVector g = gradient(theta, c_k, batch);
      const RVector update =
          (a_k * g).cwiseMax(-config.max_log_step).cwiseMin(config.max_log_step);
      const RVector candidate = (theta - update).cwiseMax(-kLogBound).cwiseMin(kLogBound);
      ++step;
      if (config.blocking) {
        const double before = objective(theta, batch);
        const double after = objective(candidate, batch);
        if (!std::isfinite(before)) {
          fail("non-finite batch loss", best_theta);
        }
        if (!std::isfinite(after) || after > (1.0 + config.block_tolerance) * before) {
          continue;
        }
      }
      theta = candidate;
    }
    const double val = objective(theta, val_idx);
    if (!std::isfinite(val)) {
      fail("non-finite validation loss at epoch " + std::to_string(epoch), best_theta);
    }
    const EpochRecord rec{epoch, evals_count > 0 ? evals_sum / static_cast<double>(evals_count) : 0.0,
                          val};
    model.meta.history.push_back(rec);
    if (val < best_val) {
      best_val = val;
      best_theta = theta;
      model.meta.best_epoch = epoch;
    }
    if (on_epoch) {
      on_epoch(rec);
    }
  }

  assign_log_params(model, best_theta);
  model.meta.best_val_loss = best_val;
  return model;
}

}  // namespace crpca
