// crpca: generate datasets, run the solver, train unfolded models, evaluate
// and render defect images.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 I/O failure. Relative output paths are placed under $CRPCA_OUTPUT_ROOT
// when it is set.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crpca/dataset.hpp"
#include "crpca/experiment.hpp"
#include "crpca/image.hpp"
#include "crpca/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace crpca;

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kNumericalError = 2, kIoError = 3 };

constexpr const char* kOutputRootEnv = "CRPCA_OUTPUT_ROOT";

fs::path output_path(const fs::path& p) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root == nullptr || *root == '\0' || p.is_absolute()) return p;
  return fs::path(root) / p;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// Solver flags; unset flags keep the dataset config's values.
struct SolverFlags {
  std::string decay;
  std::string adjoint;
  double gamma = 0, lambda_l = 0, lambda_s = -1, rho_init = 0, rho_growth = 0, rho_max = 0,
         epsilon = 0;
  long max_iters = 0;

  void add(CLI::App* app) {
    app->add_option("--decay", decay, "const, log or exp");
    app->add_option("--adjoint", adjoint, "hermitian or pseudoinverse");
    app->add_option("--gamma", gamma, "Decay parameter");
    app->add_option("--lambda-l", lambda_l, "Low-rank regularization weight");
    app->add_option("--lambda-s", lambda_s, "Sparse regularization weight (0 = 1/sqrt(max(M,N)))");
    app->add_option("--rho-init", rho_init, "Initial penalty");
    app->add_option("--rho-growth", rho_growth, "Penalty growth factor");
    app->add_option("--rho-max", rho_max, "Penalty cap");
    app->add_option("--epsilon", epsilon, "Residual tolerance");
    app->add_option("--max-iters", max_iters, "Iteration budget");
  }

  SolverConfig apply(SolverConfig c) const {
    DecaySpec d = c.decay_l;
    if (!decay.empty()) d.kind = parse_decay_kind(decay);
    if (gamma > 0) d.gamma = gamma;
    c = with_decay(c, d);
    if (!adjoint.empty()) c.adjoint_mode = parse_adjoint_mode(adjoint);
    if (lambda_l > 0) c.lambda_L = lambda_l;
    if (lambda_s >= 0) c.lambda_S = lambda_s;
    if (rho_init > 0) c.rho_init = rho_init;
    if (rho_growth > 0) c.rho_growth = rho_growth;
    if (rho_max > 0) c.rho_max = rho_max;
    if (epsilon > 0) c.epsilon = epsilon;
    if (max_iters > 0) c.max_iters = max_iters;
    c.validate();
    return c;
  }
};

MeasurementOperators ops_for(const Dataset& d, AdjointMode mode) {
  return d.ops.adjoint_mode() == mode ? d.ops : d.ops.with_adjoint(mode);
}

const Split& pick_split(const Dataset& d, const std::string& name) {
  if (name == "train") return d.train;
  if (name == "test") return d.test;
  throw std::invalid_argument("unknown split '" + name + "' (train or test)");
}

void print_metrics(const Metrics& m) {
  std::cout << "rmse_L=" << fmt(m.rmse_L) << " rmse_S=" << fmt(m.rmse_S)
            << " rmse_LS=" << fmt(m.rmse_LS);
  if (!std::isnan(m.hit_rate)) std::cout << " hit_rate=" << fmt(m.hit_rate);
  std::cout << '\n';
}

int cmd_generate(const std::string& config_file, const std::string& out, long seed,
                 double compression, long train_count, long test_count) {
  ExperimentConfig c;
  if (!config_file.empty()) c = config_from_json(load_text(config_file));
  if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
  if (compression > 0) {
    c.compression_percent = compression;
    c.K = 0;
  }
  if (train_count >= 0) c.train_count = train_count;
  if (test_count >= 0) c.test_count = test_count;
  c.validate();
  const fs::path dir = output_path(out.empty() ? c.output_dir : out);
  const Dataset d = generate_dataset(c);
  save_dataset(d, dir);
  std::cout << "wrote " << dir.string() << " (" << to_string(c.model) << ", K=" << c.measurements()
            << ", " << d.train.size() << " train, " << d.test.size() << " test, hash "
            << config_hash(c) << ")\n";
  return kOk;
}

int cmd_solve(const std::string& dataset, const std::string& split_name, const SolverFlags& flags,
              bool timing, const std::string& out) {
  const Dataset d = load_dataset(dataset);
  SolverConfig c = flags.apply(d.config.solver);
  c.record_timing = timing;
  const MeasurementOperators ops = ops_for(d, c.adjoint_mode);
  const Split& split = pick_split(d, split_name);
  const fs::path dir = output_path(out);

  std::string traces = "sample,iter,residual,rho,wall_ms\n";
  std::vector<Estimate> est;
  int failures = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    SolveResult r = admm_solve(split.samples[i].y, ops, c);
    if (r.trace.status == SolveStatus::numerical_failure) {
      ++failures;
      std::cerr << "sample " << i << ": " << r.trace.message << '\n';
    }
    std::istringstream csv(r.trace.to_csv());
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) traces += std::to_string(i) + ',' + line + '\n';
    est.push_back({std::move(r.L), std::move(r.S)});
  }
  CMatrix ls(d.ops.lowrank_shape().size(), static_cast<Index>(est.size()));
  CMatrix ss(d.ops.sparse_shape().size(), static_cast<Index>(est.size()));
  for (std::size_t i = 0; i < est.size(); ++i) {
    ls.col(static_cast<Index>(i)) = vec(est[i].L);
    ss.col(static_cast<Index>(i)) = vec(est[i].S);
  }
  save_tensor(dir / "L_hat.tensor", make_tensor(ls));
  save_tensor(dir / "S_hat.tensor", make_tensor(ss));
  save_text(dir / "traces.csv", traces);
  if (!est.empty()) print_metrics(score(est, split));
  if (failures > 0) {
    std::cerr << failures << " of " << split.size() << " samples hit a numerical failure\n";
    return kNumericalError;
  }
  return kOk;
}

int cmd_train(const std::string& dataset, const SolverFlags& flags, TrainConfig t,
              const std::string& decay, long layers, long epochs, long seed, const std::string& out,
              std::string curve) {
  const Dataset d = load_dataset(dataset);
  SolverConfig init = flags.apply(d.config.solver);
  const DecayKind kind = decay.empty() ? d.config.train_decay : parse_decay_kind(decay);
  init = with_decay(init, {kind, init.decay_l.gamma});
  if (layers > 0) t.num_layers = layers;
  if (epochs >= 0) t.epochs = epochs;
  if (seed >= 0) t.seed = static_cast<std::uint64_t>(seed);
  const MeasurementOperators ops = ops_for(d, init.adjoint_mode);
  const fs::path model_path = output_path(out);
  if (curve.empty()) curve = model_path.string() + ".curve.csv";

  std::string log = "epoch,train_loss,val_loss\n";
  auto on_epoch = [&](const EpochRecord& r) {
    log += std::to_string(r.epoch) + ',' + fmt(r.train_loss) + ',' + fmt(r.val_loss) + '\n';
  };
  try {
    const UnfoldedModel m = train(d.train.samples, ops, init, t, on_epoch);
    save_model(model_path, m);
    save_text(output_path(curve), log);
    std::cout << "wrote " << model_path.string() << " (T=" << m.num_layers()
              << ", decay=" << to_string(m.decay_kind) << ", val " << fmt(m.meta.initial_val_loss)
              << " -> " << fmt(m.meta.best_val_loss) << " at epoch " << m.meta.best_epoch << ")\n";
  } catch (const TrainingDiverged& e) {
    save_model(model_path, e.best_model());
    save_text(output_path(curve), log);
    std::cerr << e.what() << "; wrote last good model to " << model_path.string() << '\n';
    return kNumericalError;
  }
  return kOk;
}

int cmd_eval(const std::vector<std::string>& datasets, const std::vector<std::string>& models,
             const std::vector<long>& urpca, const std::vector<long>& admm_iters,
             const std::string& admm_decay, bool sp, bool timing, const SolverFlags& flags,
             const std::string& out) {
  std::vector<Dataset> data;
  for (const auto& p : datasets) data.push_back(load_dataset(p));
  ExperimentSpec spec;
  spec.record_timing = timing;
  for (const auto& d : data) spec.datasets.push_back({d.config.compression_percent, &d});

  const SolverConfig base = flags.apply(data.front().config.solver);
  if (!urpca.empty()) {
    MethodSpec m{"URPCA-T", MethodKind::admm, DecayKind::constant, {}, base, {}};
    for (long it : urpca) m.iterations.push_back(it);
    spec.methods.push_back(m);
  }
  if (!admm_iters.empty()) {
    MethodSpec m{"RPCA-AT", MethodKind::admm, parse_decay_kind(admm_decay), {}, base, {}};
    for (long it : admm_iters) m.iterations.push_back(it);
    spec.methods.push_back(m);
  }
  if (!models.empty()) {
    MethodSpec m{"TRPCA", MethodKind::unfolded, DecayKind::constant, {}, base, {}};
    for (const auto& d : data) {
      for (const auto& p : models) {
        if (!fs::exists(p)) {
          m.models.push_back({p, std::nullopt, d.config.compression_percent});
          continue;
        }
        try {
          m.models.push_back({p, load_model(p, d.ops), d.config.compression_percent});
        } catch (const IoError&) {
          // Belongs to a dataset of different dimensions.
        }
      }
    }
    spec.methods.push_back(m);
  }
  if (sp) spec.methods.push_back({"SP", MethodKind::sp, DecayKind::constant, {}, base, {}});

  const EvalReport report = run_experiment(spec);
  for (const auto& c : report.cells) {
    if (!c.error.empty()) std::cerr << c.method << ": " << c.error << '\n';
  }
  const std::string csv = report.to_csv();
  if (out.empty()) {
    std::cout << csv;
  } else {
    save_text(output_path(out), csv);
    std::cout << "wrote " << output_path(out).string() << " (" << report.cells.size()
              << " cells)\n";
  }
  return kOk;
}

int cmd_image(const std::string& input, long column, long grid, const std::string& out) {
  const CMatrix m = load_tensor(input).matrix();
  if (column < 0 || column >= m.cols()) {
    throw std::invalid_argument("column " + std::to_string(column) + " out of range [0, " +
                                std::to_string(m.cols()) + ")");
  }
  const GridImage img = render_grid_image(m.col(column), grid > 0 ? grid : 0);
  const fs::path prefix = output_path(out);
  save_text(prefix.string() + ".csv", img.csv);
  save_text(prefix.string() + ".pgm", img.pgm);
  std::cout << "wrote " << prefix.string() << ".csv and .pgm (" << img.side << "x" << img.side
            << ")\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive low-rank plus sparse recovery with reweighted ADMM and unfolding"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  std::string gen_config, gen_out;
  long gen_seed = -1, gen_train = -1, gen_test = -1;
  double gen_ratio = 0;
  gen->add_option("-c,--config", gen_config, "JSON config file");
  gen->add_option("-o,--out", gen_out, "Dataset directory (default: config output_dir)");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--compression", gen_ratio, "K/MN in percent");
  gen->add_option("--train-count", gen_train, "Training samples");
  gen->add_option("--test-count", gen_test, "Test samples");

  auto* solve = app.add_subcommand("solve", "Run the ADMM solver on a dataset split");
  std::string solve_data, solve_split = "test", solve_out;
  bool solve_timing = false;
  SolverFlags solve_flags;
  solve->add_option("-d,--dataset", solve_data, "Dataset directory")->required();
  solve->add_option("--split", solve_split, "train or test");
  solve->add_option("-o,--out", solve_out, "Output directory")->required();
  solve->add_flag("--timing", solve_timing, "Record wall-clock time per iteration");
  solve_flags.add(solve);

  auto* tr = app.add_subcommand("train", "Train an unfolded model");
  std::string tr_data, tr_out, tr_curve, tr_decay, tr_opt;
  long tr_layers = 0, tr_epochs = -1, tr_seed = -1, tr_batch = 0;
  double tr_step = 0, tr_pert = 0;
  SolverFlags tr_flags;
  tr->add_option("-d,--dataset", tr_data, "Dataset directory")->required();
  tr->add_option("-o,--out", tr_out, "Model file")->required();
  tr->add_option("--curve", tr_curve, "Training curve CSV (default: <model>.curve.csv)");
  tr->add_option("--layers", tr_layers, "Number of layers T");
  tr->add_option("--epochs", tr_epochs, "Epochs (0 writes the initialization)");
  tr->add_option("--batch-size", tr_batch, "Mini-batch size");
  tr->add_option("--optimizer", tr_opt, "spsa or central_fd");
  tr->add_option("--step-size", tr_step, "First log-space step size");
  tr->add_option("--perturbation", tr_pert, "Log-space perturbation");
  tr->add_option("--seed", tr_seed, "Training seed");
  tr_flags.add(tr);

  auto* ev = app.add_subcommand("eval", "Evaluate methods and write the report CSV");
  std::vector<std::string> ev_data, ev_models;
  std::vector<long> ev_urpca, ev_admm;
  std::string ev_decay = "log", ev_out;
  bool ev_sp = false, ev_timing = false;
  SolverFlags ev_flags;
  ev->add_option("-d,--dataset", ev_data, "Dataset directories")->required();
  ev->add_option("-m,--model", ev_models, "Model files");
  ev->add_option("--urpca", ev_urpca, "URPCA-T iteration counts");
  ev->add_option("--admm", ev_admm, "Untrained reweighted ADMM iteration counts");
  ev->add_option("--admm-decay", ev_decay, "Decay for --admm");
  ev->add_flag("--sp", ev_sp, "Include the subspace projection baseline (sfcw)");
  ev->add_flag("--timing", ev_timing, "Fill wall_ms");
  ev->add_option("-o,--out", ev_out, "Report CSV (default: stdout)");
  ev_flags.add(ev);

  auto* img = app.add_subcommand("image", "Render |s| as CSV and PGM");
  std::string img_in, img_out;
  long img_col = 0, img_grid = 0;
  img->add_option("-i,--input", img_in, "Tensor with s vectors as columns")->required();
  img->add_option("--column", img_col, "Column (sample) to render");
  img->add_option("--grid", img_grid, "Grid side g (default sqrt(Q))");
  img->add_option("-o,--out", img_out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) return cmd_generate(gen_config, gen_out, gen_seed, gen_ratio, gen_train, gen_test);
    if (*solve) return cmd_solve(solve_data, solve_split, solve_flags, solve_timing, solve_out);
    if (*tr) {
      TrainConfig t = load_dataset(tr_data).config.train;
      if (tr_batch > 0) t.batch_size = tr_batch;
      if (!tr_opt.empty()) t.optimizer = parse_optimizer(tr_opt);
      if (tr_step > 0) t.step_size = tr_step;
      if (tr_pert > 0) t.perturbation = tr_pert;
      return cmd_train(tr_data, tr_flags, t, tr_decay, tr_layers, tr_epochs, tr_seed, tr_out,
                       tr_curve);
    }
    if (*ev) {
      return cmd_eval(ev_data, ev_models, ev_urpca, ev_admm, ev_decay, ev_sp, ev_timing, ev_flags,
                      ev_out);
    }
    if (*img) return cmd_image(img_in, img_col, img_grid, img_out);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const TrainingDiverged& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
