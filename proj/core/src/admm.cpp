#include "crpca/admm.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace crpca {

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("solver config: " + what); };
  if (!(lambda_L > 0.0)) fail("lambda_L must be positive");
  if (!(rho_init > 0.0)) fail("rho_init must be positive");
  if (!(rho_growth >= 1.0)) fail("rho_growth must be >= 1");
  if (!(rho_max >= rho_init)) fail("rho_max must be >= rho_init");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (!(decay_l.gamma > 0.0) || !(decay_s.gamma > 0.0)) fail("decay gamma must be positive");
}

double SolverConfig::resolved_lambda_S(Shape lowrank_shape) const {
  if (lambda_S > 0.0) {
    return lambda_S;
  }
  return 1.0 / std::sqrt(static_cast<double>(std::max(lowrank_shape.rows, lowrank_shape.cols)));
}

SolverConfig with_decay(SolverConfig config, DecaySpec spec) {
  config.decay_l = spec;
  config.decay_s = spec;
  return config;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

std::string SolverTrace::to_csv() const {
  std::ostringstream out;
  out << "iter,residual,rho,wall_ms\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.iter << ',' << r.residual << ',' << r.rho << ',' << r.wall_ms << '\n';
  }
  return out.str();
}

RVector thresholds_L(const CMatrix& prev_L, double lambda, const DecaySpec& decay_l) {
  const Index k = std::min(prev_L.rows(), prev_L.cols());
  if (decay_l.kind == DecayKind::constant) {
    return RVector::Constant(k, lambda);
  }
  const RVector sigma = thin_svd(prev_L).singular_values;
  RVector t(k);
  for (Index m = 0; m < k; ++m) {
    t(m) = lambda * decay(decay_l, sigma(m));
  }
  return t;
}

RMatrix thresholds_S(const CMatrix& prev_S, double lambda, const DecaySpec& decay_s) {
  RMatrix t(prev_S.rows(), prev_S.cols());
  for (Index j = 0; j < prev_S.cols(); ++j) {
    for (Index i = 0; i < prev_S.rows(); ++i) {
      t(i, j) = lambda * decay(decay_s, std::abs(prev_S(i, j)));
    }
  }
  return t;
}

namespace {

void check_measurement(const CVector& v, const MeasurementOperators& ops, const char* what) {
  if (v.size() != ops.measurements()) {
    throw std::invalid_argument(std::string(what) + " has length " + std::to_string(v.size()) +
                                ", expected K=" + std::to_string(ops.measurements()));
  }
}

CVector dual_step(const CVector& u_t, double rho_t, const CVector& y, const CVector& fit) {
  return u_t + rho_t * (fit - y);
}

}  // namespace

CMatrix update_L(const CVector& y, const CMatrix& S_t, const CVector& u_t, double rho_t,
                 const MeasurementOperators& ops, const RVector& thresholds) {
  check_measurement(y, ops, "y");
  check_measurement(u_t, ops, "u");
  const CVector r = y - ops.apply_sparse(S_t) - u_t / rho_t;
  const CVector back = ops.lowrank_adjoint().apply(r);
  return svt(unvec(back, ops.lowrank_shape()), thresholds);
}

CMatrix update_S(const CVector& y, const CMatrix& L_next, const CVector& u_t, double rho_t,
                 const MeasurementOperators& ops, const RMatrix& thresholds) {
  check_measurement(y, ops, "y");
  check_measurement(u_t, ops, "u");
  const CVector r = y - ops.apply_lowrank(L_next) - u_t / rho_t;
  const CVector back = ops.sparse_adjoint().apply(r);
  return soft_threshold_map(unvec(back, ops.sparse_shape()), thresholds);
}

CVector update_u(const CVector& u_t, double rho_t, const CVector& y, const CMatrix& L_next,
                 const CMatrix& S_next, const MeasurementOperators& ops) {
  check_measurement(y, ops, "y");
  check_measurement(u_t, ops, "u");
  return dual_step(u_t, rho_t, y, ops.forward(L_next, S_next));
}

SolverState initial_state(const MeasurementOperators& ops, const SolverConfig& config) {
  const Shape ls = ops.lowrank_shape();
  const Shape ss = ops.sparse_shape();
  return {CMatrix::Zero(ls.rows, ls.cols), CMatrix::Zero(ss.rows, ss.cols),
          CVector::Zero(ops.measurements()), config.rho_init, 0};
}

SolverState admm_step(const SolverState& state, const CVector& y, const MeasurementOperators& ops,
                      const SolverConfig& config, TraceRecord* record) {
  const double lam_l = config.lambda_L / state.rho;
  const double lam_s = config.resolved_lambda_S(ops.lowrank_shape()) / state.rho;
  const RVector t_l = thresholds_L(state.L, lam_l, config.decay_l);
  const RMatrix t_s = thresholds_S(state.S, lam_s, config.decay_s);

  SolverState next;
  next.L = update_L(y, state.S, state.u, state.rho, ops, t_l);
  next.S = update_S(y, next.L, state.u, state.rho, ops, t_s);
  const CVector fit = ops.forward(next.L, next.S);
  next.u = dual_step(state.u, state.rho, y, fit);
  next.rho = std::min(config.rho_growth * state.rho, config.rho_max);
  next.iter = state.iter + 1;

  if (record != nullptr) {
    record->iter = next.iter;
    record->residual = (fit - y).squaredNorm();
    record->rho = state.rho;
    record->threshold_L_min = t_l.minCoeff();
    record->threshold_L_max = t_l.maxCoeff();
    record->threshold_S_min = t_s.minCoeff();
    record->threshold_S_max = t_s.maxCoeff();
  }
  return next;
}

SolveResult admm_solve(const CVector& y, const MeasurementOperators& ops,
                       const SolverConfig& config) {
  config.validate();
  check_measurement(y, ops, "y");
  if (ops.adjoint_mode() != config.adjoint_mode) {
    throw std::invalid_argument("operator back-projection mode '" +
                                std::string(to_string(ops.adjoint_mode())) +
                                "' does not match solver config '" +
                                std::string(to_string(config.adjoint_mode)) + "'");
  }
  using Clock = std::chrono::steady_clock;

  SolverState state = initial_state(ops, config);
  SolveResult result;
  double residual = 0.0;
  do {
    const auto start = Clock::now();
    TraceRecord rec;
    SolverState next;
    try {
      next = admm_step(state, y, ops, config, &rec);
    } catch (const NumericalError& e) {
      result.trace.status = SolveStatus::numerical_failure;
      result.trace.message = e.what();
      break;
    }
    if (!all_finite(next.L) || !all_finite(next.S) || !std::isfinite(rec.residual)) {
      result.trace.status = SolveStatus::numerical_failure;
      result.trace.message = "non-finite iterate at iteration " + std::to_string(next.iter);
      break;
    }
    if (config.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }
    residual = rec.residual;
    result.trace.records.push_back(rec);
    state = std::move(next);
  } while (residual > config.epsilon && state.iter < config.max_iters);

  if (result.trace.status != SolveStatus::numerical_failure) {
    result.trace.status =
        residual <= config.epsilon ? SolveStatus::converged : SolveStatus::max_iterations;
  }
  result.L = std::move(state.L);
  result.S = std::move(state.S);
  return result;
}

}  // namespace crpca
