#include "crpca/unfolded.hpp"

#include <cmath>

namespace crpca {

void UnfoldedModel::validate() const {
  if (layers.empty()) {
    throw std::invalid_argument("unfolded model needs at least one layer");
  }
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const auto& p = layers[t];
    for (double v : {p.lambda_S, p.lambda_L, p.gamma, p.rho}) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("layer " + std::to_string(t) +
                                    " has a non-positive or non-finite scalar");
      }
    }
  }
}

UnfoldedModel matched_model(const MeasurementOperators& ops, const SolverConfig& config,
                            Index num_layers) {
  config.validate();
  if (num_layers < 1) {
    throw std::invalid_argument("matched_model: need at least one layer");
  }
  if (config.decay_l.kind != config.decay_s.kind || config.decay_l.gamma != config.decay_s.gamma) {
    throw std::invalid_argument("unfolded layers share one decay function for L and S");
  }
  UnfoldedModel model;
  model.decay_kind = config.decay_l.kind;
  model.ops = ops;
  const double lam_s = config.resolved_lambda_S(ops.lowrank_shape());
  double rho = config.rho_init;
  for (Index t = 0; t < num_layers; ++t) {
    model.layers.push_back({lam_s / rho, config.lambda_L / rho, config.decay_l.gamma, rho});
    rho = std::min(config.rho_growth * rho, config.rho_max);
  }
  return model;
}

CMatrix stack_measurements(std::span<const Sample> batch) {
  if (batch.empty()) {
    return {};
  }
  CMatrix ys(batch.front().y.size(), static_cast<Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].y.size() != ys.rows()) {
      throw std::invalid_argument("batch samples have different measurement lengths");
    }
    ys.col(static_cast<Index>(i)) = batch[i].y;
  }
  return ys;
}

std::vector<Estimate> forward_batch(const UnfoldedModel& model, const CMatrix& ys) {
  model.validate();
  const MeasurementOperators& ops = model.ops;
  if (ys.rows() != ops.measurements()) {
    throw std::invalid_argument("forward: measurement length " + std::to_string(ys.rows()) +
                                " does not match K=" + std::to_string(ops.measurements()));
  }
  const Index batch = ys.cols();
  const Shape ls = ops.lowrank_shape();
  const Shape ss = ops.sparse_shape();
  const Index k = std::min(ls.rows, ls.cols);

  CMatrix lows = CMatrix::Zero(ls.size(), batch);
  CMatrix sparses = CMatrix::Zero(ss.size(), batch);
  CMatrix duals = CMatrix::Zero(ys.rows(), batch);
  CMatrix a_s_sparse = CMatrix::Zero(ys.rows(), batch);
  RMatrix spectra = RMatrix::Zero(k, batch);

  for (const LayerParams& p : model.layers) {
    const DecaySpec g{model.decay_kind, p.gamma};

    const CMatrix lin = ops.lowrank_adjoint().apply(ys - a_s_sparse - duals / p.rho);
    RVector t_l(k);
    for (Index b = 0; b < batch; ++b) {
      for (Index m = 0; m < k; ++m) {
        t_l(m) = p.lambda_L * decay(g, spectra(m, b));
      }
      SvtResult r = svt_with_spectrum(unvec(lin.col(b), ls), t_l);
      lows.col(b) = vec(r.matrix);
      spectra.col(b) = r.singular_values;
    }
    const CMatrix a_l_low = ops.lowrank().apply(lows);

    const CMatrix sin = ops.sparse_adjoint().apply(ys - a_l_low - duals / p.rho);
    for (Index b = 0; b < batch; ++b) {
      for (Index i = 0; i < ss.size(); ++i) {
        const double thr = p.lambda_S * decay(g, std::abs(sparses(i, b)));
        sparses(i, b) = soft_threshold(sin(i, b), thr);
      }
    }
    a_s_sparse = ops.sparse().apply(sparses);
    duals += p.rho * ((a_s_sparse + a_l_low) - ys);
  }

  std::vector<Estimate> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (Index b = 0; b < batch; ++b) {
    out.push_back({unvec(lows.col(b), ls), unvec(sparses.col(b), ss)});
  }
  return out;
}

Estimate forward(const UnfoldedModel& model, const CVector& y) {
  return std::move(forward_batch(model, y).front());
}

double sample_loss(const Estimate& estimate, const Scene& truth) {
  const double ln = truth.L.squaredNorm();
  const double sn = truth.S.squaredNorm();
  if (ln == 0.0 || sn == 0.0) {
    throw std::invalid_argument("loss: ground truth with zero Frobenius norm");
  }
  return 0.5 * (estimate.L - truth.L).squaredNorm() / ln +
         0.5 * (estimate.S - truth.S).squaredNorm() / sn;
}

double loss(const UnfoldedModel& model, std::span<const Sample> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("loss: empty batch");
  }
  const std::vector<Estimate> est = forward_batch(model, stack_measurements(batch));
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total += sample_loss(est[i], batch[i].scene);
  }
  return total / static_cast<double>(batch.size());
}

}  // namespace crpca
