#include "crpca/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "crpca/tensor_io.hpp"

namespace crpca {

namespace {

constexpr std::size_t kForwardChunk = 50;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Metrics score(std::span<const Estimate> estimates, const Split& split) {
  if (estimates.size() != split.size()) {
    throw std::invalid_argument("score: estimate count does not match the split");
  }
  std::vector<CMatrix> eL, eS, tL, tS;
  for (std::size_t i = 0; i < split.size(); ++i) {
    eL.push_back(estimates[i].L);
    eS.push_back(estimates[i].S);
    tL.push_back(split.samples[i].scene.L);
    tS.push_back(split.samples[i].scene.S);
  }
  Metrics m;
  m.rmse_L = rmse_l(eL, tL);
  m.rmse_S = rmse_s(eS, tS);
  m.rmse_LS = rmse_ls(eL, eS, tL, tS);
  if (!split.defects.empty()) {
    double hits = 0.0;
    for (std::size_t i = 0; i < split.size(); ++i) {
      hits += detection_hit_rate(vec(estimates[i].S), split.defects[i]);
    }
    m.hit_rate = hits / static_cast<double>(split.size());
  }
  return m;
}

std::vector<Estimate> run_admm(const Split& split, const MeasurementOperators& ops,
                               const SolverConfig& config) {
  std::vector<Estimate> out;
  out.reserve(split.size());
  for (const auto& s : split.samples) {
    SolveResult r = admm_solve(s.y, ops, config);
    out.push_back({std::move(r.L), std::move(r.S)});
  }
  return out;
}

std::vector<Estimate> run_unfolded(const Split& split, const UnfoldedModel& model) {
  std::vector<Estimate> out;
  out.reserve(split.size());
  const std::span<const Sample> all(split.samples);
  for (std::size_t start = 0; start < all.size(); start += kForwardChunk) {
    const auto chunk = all.subspan(start, std::min(kForwardChunk, all.size() - start));
    for (auto& e : forward_batch(model, stack_measurements(chunk))) {
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<Estimate> run_sp(const Split& split, const CMatrix& dictionary, Index clutter_rank) {
  if (split.full_data.size() != split.size()) {
    throw std::invalid_argument("run_sp: split has no full data");
  }
  const CMatrix pinv = pseudoinverse(dictionary);
  std::vector<Estimate> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const Shape ls{split.samples[i].scene.L.rows(), split.samples[i].scene.L.cols()};
    const Shape ss{split.samples[i].scene.S.rows(), split.samples[i].scene.S.cols()};
    const CMatrix y = unvec(split.full_data[i], ls);
    const CVector s = sp_baseline_with_pinv(y, clutter_rank, pinv);
    CMatrix l = CMatrix::Zero(ls.rows, ls.cols);
    if (clutter_rank > 0) {
      const SvdResult f = thin_svd(y);
      l = f.left_vectors.leftCols(clutter_rank) *
          f.singular_values.head(clutter_rank).cast<Complex>().asDiagonal() *
          f.right_vectors.leftCols(clutter_rank).adjoint();
    }
    out.push_back({std::move(l), unvec(s, ss)});
  }
  return out;
}

double admm_loss(const Split& split, const MeasurementOperators& ops, const SolverConfig& config,
                 Index max_samples) {
  const std::size_t n =
      max_samples > 0 ? std::min(split.size(), static_cast<std::size_t>(max_samples)) : split.size();
  if (n == 0) {
    throw std::invalid_argument("admm_loss: empty split");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const SolveResult r = admm_solve(split.samples[i].y, ops, config);
    total += sample_loss({r.L, r.S}, split.samples[i].scene);
  }
  return total / static_cast<double>(n);
}

SolverConfig select_solver(const Split& split, const MeasurementOperators& ops,
                           std::span<const SolverConfig> candidates, Index max_samples) {
  if (candidates.empty()) {
    throw std::invalid_argument("select_solver: no candidates");
  }
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double l = admm_loss(split, ops, candidates[i], max_samples);
    if (l < best_loss) {
      best_loss = l;
      best = i;
    }
  }
  return candidates[best];
}

SolverConfig tune_rho(const Split& split, const MeasurementOperators& ops, SolverConfig base,
                      Index iterations, std::span<const double> grid, Index max_samples) {
  if (grid.empty()) {
    throw std::invalid_argument("tune_rho: empty grid");
  }
  base.max_iters = iterations;
  std::vector<SolverConfig> candidates;
  for (double rho : grid) {
    SolverConfig c = base;
    c.rho_init = rho;
    c.rho_max = std::max(c.rho_max, rho);
    candidates.push_back(c);
  }
  return select_solver(split, ops, candidates, max_samples);
}

double mean_noise_variance(const Split& split, const MeasurementOperators& ops) {
  if (split.size() == 0) return 0.0;
  double total = 0.0;
  for (const auto& s : split.samples) {
    total += (s.y - ops.forward(s.scene.L, s.scene.S)).squaredNorm();
  }
  return total / (static_cast<double>(split.size()) * static_cast<double>(ops.measurements()));
}

std::string EvalReport::to_csv() const {
  std::string out = std::string(kHeader) + "\n";
  char buf[64];
  auto num = [&](double v) {
    if (std::isnan(v)) return std::string("nan");
    if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  for (const auto& c : cells) {
    out += c.method + ',' + c.decay + ',' + std::to_string(c.layers) + ',' + num(c.compression) +
           ',' + num(c.snr_db) + ',' + num(c.metrics.rmse_L) + ',' + num(c.metrics.rmse_S) + ',' +
           num(c.metrics.rmse_LS) + ',' + num(c.crb_lower) + ',' + num(c.crb_upper) + ',' +
           num(c.metrics.hit_rate) + ',' + num(c.wall_ms) + '\n';
  }
  return out;
}

EvalReport run_experiment(const ExperimentSpec& spec) {
  using Clock = std::chrono::steady_clock;
  EvalReport report;
  for (const auto& ed : spec.datasets) {
    if (ed.data == nullptr) {
      throw std::invalid_argument("run_experiment: null dataset");
    }
    const Dataset& d = *ed.data;
    const Split& test = d.test;
    std::optional<CrbBounds> crb;
    if (d.config.model == ModelKind::gaussian && d.ops.shared() && test.size() > 0) {
      CrbInputs in{d.config.M,      d.config.N,      d.ops.measurements(),
                   d.config.sparsity_s, d.config.rank_r, mean_noise_variance(test, d.ops)};
      if (in.K > in.sparsity_s) crb = crb_bounds(in);
    }
    auto make_cell = [&](const std::string& method, const std::string& decay, Index layers) {
      EvalCell cell;
      cell.method = method;
      cell.decay = decay;
      cell.layers = layers;
      cell.compression = ed.compression_percent;
      cell.snr_db = d.config.snr_db;
      if (crb) {
        cell.crb_lower = crb->lower;
        cell.crb_upper = crb->upper;
      }
      return cell;
    };
    auto finish = [&](EvalCell cell, Clock::time_point start,
                      const std::vector<Estimate>& estimates) {
      cell.metrics = score(estimates, test);
      if (spec.record_timing) {
        cell.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
      report.cells.push_back(std::move(cell));
    };
    auto failed = [&](EvalCell cell, const std::string& why) {
      cell.metrics = {kNaN, kNaN, kNaN, kNaN};
      cell.error = why;
      report.cells.push_back(std::move(cell));
    };

    for (const auto& m : spec.methods) {
      switch (m.kind) {
        case MethodKind::admm: {
          SolverConfig c = with_decay(m.solver, {m.decay, m.solver.decay_l.gamma});
          const MeasurementOperators ops =
              d.ops.adjoint_mode() == c.adjoint_mode ? d.ops : d.ops.with_adjoint(c.adjoint_mode);
          for (Index it : m.iterations) {
            c.max_iters = it;
            const auto start = Clock::now();
            finish(make_cell(m.name, std::string(to_string(m.decay)), it), start,
                   run_admm(test, ops, c));
          }
          break;
        }
        case MethodKind::unfolded:
          for (const auto& ref : m.models) {
            if (ref.compression_percent != ed.compression_percent) continue;
            std::optional<UnfoldedModel> model = ref.model;
            std::string why;
            if (!model) {
              try {
                model = load_model(ref.path, d.ops);
              } catch (const IoError& e) {
                why = e.what();
              }
            }
            if (!model) {
              failed(make_cell(m.name, "unknown", 0), why);
              continue;
            }
            const auto start = Clock::now();
            finish(make_cell(m.name, std::string(to_string(model->decay_kind)), model->num_layers()),
                   start, run_unfolded(test, *model));
          }
          break;
        case MethodKind::sp: {
          if (d.config.model != ModelKind::sfcw) {
            failed(make_cell(m.name, "none", 0), "SP baseline needs an sfcw dataset");
            break;
          }
          const auto start = Clock::now();
          finish(make_cell(m.name, "none", 0), start,
                 run_sp(test, d.dictionary, d.config.radar.clutter_rank));
          break;
        }
      }
    }
  }
  return report;
}

}  // namespace crpca
