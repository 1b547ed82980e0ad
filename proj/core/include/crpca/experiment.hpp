// Evaluation harness: runs methods over dataset test splits and assembles the
// CSV report (one row per method x layer count x dataset cell).

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crpca/dataset.hpp"
#include "crpca/metrics.hpp"

namespace crpca {

struct Metrics {
  double rmse_L = 0.0;
  double rmse_S = 0.0;
  double rmse_LS = 0.0;
  /// NaN unless the split carries defect indices.
  double hit_rate = std::numeric_limits<double>::quiet_NaN();
};

Metrics score(std::span<const Estimate> estimates, const Split& split);

/// admm_solve per sample. Samples whose solve ends in numerical failure keep
/// the last finite iterate.
std::vector<Estimate> run_admm(const Split& split, const MeasurementOperators& ops,
                               const SolverConfig& config);
std::vector<Estimate> run_unfolded(const Split& split, const UnfoldedModel& model);
/// Subspace projection on the full data: S from the imaged residual, L from
/// the removed clutter subspace.
std::vector<Estimate> run_sp(const Split& split, const CMatrix& dictionary, Index clutter_rank);

/// Mean training loss of admm_solve over the first `max_samples` samples.
double admm_loss(const Split& split, const MeasurementOperators& ops, const SolverConfig& config,
                 Index max_samples);

/// Candidate with the lowest admm_loss; ties go to the earlier entry.
SolverConfig select_solver(const Split& split, const MeasurementOperators& ops,
                           std::span<const SolverConfig> candidates, Index max_samples);

/// Picks rho_init from `grid` minimizing admm_loss at `iterations`
/// iterations; ties go to the earlier grid entry.
SolverConfig tune_rho(const Split& split, const MeasurementOperators& ops, SolverConfig base,
                      Index iterations, std::span<const double> grid, Index max_samples);

/// Noise-variance estimate for the CRB: mean over samples of
/// ||y - A_l vec(L) - A_s vec(S)||^2 / K.
double mean_noise_variance(const Split& split, const MeasurementOperators& ops);

enum class MethodKind { admm, unfolded, sp };

struct ModelRef {
  /// Loaded against the dataset operators when `model` is empty.
  std::filesystem::path path;
  std::optional<UnfoldedModel> model;
  /// Dataset this model belongs to.
  double compression_percent = 0.0;
};

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::admm;
  /// admm: decay used by the solver (overrides solver.decay_*).
  DecayKind decay = DecayKind::constant;
  /// admm: iteration counts, one cell each.
  std::vector<Index> iterations;
  SolverConfig solver;
  /// unfolded: one cell per model whose compression matches the dataset.
  std::vector<ModelRef> models;
};

struct EvalDataset {
  double compression_percent = 0.0;
  const Dataset* data = nullptr;
};

struct ExperimentSpec {
  std::vector<EvalDataset> datasets;
  std::vector<MethodSpec> methods;
  /// Fills wall_ms; otherwise it is written as 0 so reports are
  /// byte-reproducible.
  bool record_timing = false;
};

struct EvalCell {
  std::string method;
  std::string decay;
  Index layers = 0;
  double compression = 0.0;
  double snr_db = 0.0;
  Metrics metrics;
  double crb_lower = std::numeric_limits<double>::quiet_NaN();
  double crb_upper = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  /// Non-empty when the cell could not be evaluated.
  std::string error;
};

struct EvalReport {
  std::vector<EvalCell> cells;

  static constexpr const char* kHeader =
      "method,decay,layers,compression,snr_db,rmse_L,rmse_S,rmse_LS,crb_lower,crb_upper,hit_rate,"
      "wall_ms";
  std::string to_csv() const;
};

/// Cells are produced in (dataset, method, layer count) order. Missing model
/// files yield cells with `error` set and NaN metrics.
EvalReport run_experiment(const ExperimentSpec& spec);

}  // namespace crpca
