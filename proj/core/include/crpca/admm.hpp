// Doubly-reweighted ADMM for compressive low-rank + sparse recovery.
//
// Each iteration computes per-singular-value and per-entry thresholds from
// the previous iterate, then
//
//   L+ = SVT( A_l^*( y - A_s vec(S) - u/rho ) )
//   S+ = ST ( A_s^*( y - A_l vec(L+) - u/rho ) )
//   u+ = u + rho ( A_s vec(S+) + A_l vec(L+) - y )
//   rho+ = min(rho_growth * rho, rho_max)
//
// with thresholds (lambda/rho) * g(previous magnitude). With constant decay
// this is the plain nuclear-norm + l1 ADMM (the untrained baseline).

#pragma once

#include <string>
#include <vector>

#include "crpca/numerics.hpp"
#include "crpca/operators.hpp"

namespace crpca {

struct SolverConfig {
  /// Weight of the nuclear norm.
  double lambda_L = 1.0;
  /// Weight of the l1 norm; a nonpositive value selects 1/sqrt(max(M, N)).
  double lambda_S = 0.0;
  DecaySpec decay_l{};
  DecaySpec decay_s{};
  double rho_init = 1e-2;
  double rho_growth = 1.001;
  double rho_max = 10.0;
  /// Stop once ||A_l vec(L) + A_s vec(S) - y||^2 <= epsilon.
  double epsilon = 1e-6;
  Index max_iters = 200;
  AdjointMode adjoint_mode = AdjointMode::pseudoinverse;
  /// Record wall-clock times in the trace. Off by default so traces are
  /// reproducible byte for byte.
  bool record_timing = false;

  void validate() const;
  double resolved_lambda_S(Shape lowrank_shape) const;
};

/// Same decay function (kind and gamma) for both components.
SolverConfig with_decay(SolverConfig config, DecaySpec spec);

struct SolverState {
  CMatrix L;
  CMatrix S;
  CVector u;
  double rho = 0.0;
  Index iter = 0;
};

struct TraceRecord {
  Index iter = 0;
  double residual = 0.0;
  double rho = 0.0;
  double threshold_L_min = 0.0;
  double threshold_L_max = 0.0;
  double threshold_S_min = 0.0;
  double threshold_S_max = 0.0;
  double wall_ms = 0.0;
};

enum class SolveStatus { converged, max_iterations, numerical_failure };
std::string_view to_string(SolveStatus status);

struct SolverTrace {
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::max_iterations;
  std::string message;

  /// CSV with header "iter,residual,rho,wall_ms".
  std::string to_csv() const;
};

struct SolveResult {
  CMatrix L;
  CMatrix S;
  SolverTrace trace;
};

/// lambda * g_l(sigma_m(prev_L)) for each of the min(M, N) singular values.
RVector thresholds_L(const CMatrix& prev_L, double lambda, const DecaySpec& decay_l);

/// lambda * g_s(|prev_S(m, n)|) entrywise.
RMatrix thresholds_S(const CMatrix& prev_S, double lambda, const DecaySpec& decay_s);

CMatrix update_L(const CVector& y, const CMatrix& S_t, const CVector& u_t, double rho_t,
                 const MeasurementOperators& ops, const RVector& thresholds);

CMatrix update_S(const CVector& y, const CMatrix& L_next, const CVector& u_t, double rho_t,
                 const MeasurementOperators& ops, const RMatrix& thresholds);

CVector update_u(const CVector& u_t, double rho_t, const CVector& y, const CMatrix& L_next,
                 const CMatrix& S_next, const MeasurementOperators& ops);

/// Zero iterate with rho = rho_init.
SolverState initial_state(const MeasurementOperators& ops, const SolverConfig& config);

/// One full iteration: thresholds -> update_L -> update_S -> update_u -> rho.
/// The optional record receives the residual and threshold summary.
SolverState admm_step(const SolverState& state, const CVector& y, const MeasurementOperators& ops,
                      const SolverConfig& config, TraceRecord* record = nullptr);

/// Runs admm_step from the zero state at least once, then while the residual
/// exceeds epsilon and fewer than max_iters iterations have run. A numerical
/// failure stops the run and returns the last finite iterate with status
/// numerical_failure.
SolveResult admm_solve(const CVector& y, const MeasurementOperators& ops,
                       const SolverConfig& config);

}  // namespace crpca
