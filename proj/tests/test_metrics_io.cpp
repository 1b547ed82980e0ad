#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crpca/config.hpp"
#include "crpca/dataset.hpp"
#include "crpca/experiment.hpp"
#include "crpca/image.hpp"
#include "crpca/metrics.hpp"
#include "crpca/radar.hpp"
#include "crpca/tensor_io.hpp"

namespace crpca {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("crpca_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(Rmse, Examples) {
  Rng rng(1);
  const CMatrix a = draw_normal_matrix(3, 4, rng, Field::complex);
  const CMatrix b = draw_normal_matrix(3, 4, rng, Field::complex);
  const std::vector<CMatrix> truth{a, b};
  EXPECT_EQ(rmse_l(truth, truth), 0.0);
  const std::vector<CMatrix> zeros{CMatrix::Zero(3, 4), CMatrix::Zero(3, 4)};
  EXPECT_NEAR(rmse_s(zeros, truth), 1.0, 1e-15);
  const std::vector<CMatrix> est{a * 1.2, b * 0.6};
  EXPECT_NEAR(rmse_l(est, truth), 0.3, 1e-14);
  EXPECT_THROW(normalized_rmse(std::vector<CMatrix>{a}, truth), std::invalid_argument);
}

TEST(Rmse, StackedPythagoras) {
  const std::vector<CMatrix> tl{CMatrix::Zero(2, 2)};
  const std::vector<CMatrix> ts{CMatrix::Zero(1, 3)};
  CMatrix el = CMatrix::Zero(2, 2);
  el(1, 0) = 3.0;
  CMatrix es = CMatrix::Zero(1, 3);
  es(0, 2) = Complex(0.0, 4.0);
  EXPECT_NEAR(rmse_ls(std::vector<CMatrix>{el}, std::vector<CMatrix>{es}, tl, ts), 5.0, 1e-15);
  EXPECT_EQ(rmse_ls(tl, ts, tl, ts), 0.0);
}

TEST(Crb, HandDerivedPair) {
  const CrbBounds b = crb_bounds({4, 4, 10, 2, 1, 1.0});
  EXPECT_NEAR(b.lower, 7.25, 1e-12);
  EXPECT_NEAR(b.upper, 49.25, 1e-12);
  const CrbBounds z = crb_bounds({4, 4, 10, 2, 1, 0.0});
  EXPECT_EQ(z.lower, 0.0);
  EXPECT_EQ(z.upper, 0.0);
  EXPECT_DOUBLE_EQ(CrbInputs({4, 4, 10, 2, 1, 1.0}).degrees_of_freedom(), 7.0);
}

TEST(Crb, OrderedAndLinearInNoise) {
  Rng rng(3);
  std::uniform_int_distribution<Index> dim(1, 40);
  std::uniform_real_distribution<double> var(0.01, 10.0);
  for (int i = 0; i < 1000; ++i) {
    CrbInputs in;
    in.M = dim(rng);
    in.N = dim(rng);
    in.rank_r = std::uniform_int_distribution<Index>(1, std::min(in.M, in.N))(rng);
    in.sparsity_s = std::uniform_int_distribution<Index>(0, in.M * in.N)(rng);
    in.K = in.sparsity_s + std::uniform_int_distribution<Index>(1, in.M * in.N + 5)(rng);
    in.noise_var = var(rng);
    const CrbBounds b = crb_bounds(in);
    EXPECT_LE(b.lower, b.upper);
    CrbInputs scaled = in;
    scaled.noise_var *= 3.0;
    const CrbBounds c = crb_bounds(scaled);
    EXPECT_NEAR(c.lower, 3.0 * b.lower, 1e-9 * std::abs(b.lower) + 1e-12);
    EXPECT_NEAR(c.upper, 3.0 * b.upper, 1e-9 * std::abs(b.upper) + 1e-12);
  }
}

TEST(Crb, RejectsInvalid) {
  EXPECT_THROW(crb_bounds({4, 4, 2, 2, 1, 1.0}), std::invalid_argument);
  EXPECT_THROW(crb_bounds({4, 4, 10, 2, 5, 1.0}), std::invalid_argument);
  EXPECT_THROW(crb_bounds({4, 4, 10, 2, 1, -1.0}), std::invalid_argument);
}

TEST(Detection, HitRates) {
  CVector s = CVector::Zero(6);
  s(1) = 2.0;
  s(3) = Complex(0.0, -1.0);
  s(4) = 0.5;
  const std::vector<Index> truth{1, 3, 4};
  EXPECT_DOUBLE_EQ(detection_hit_rate(s, truth), 1.0);
  CVector miss = s;
  miss(4) = 0.0;
  miss(0) = 0.1;
  EXPECT_NEAR(detection_hit_rate(miss, truth), 2.0 / 3.0, 1e-15);
  // All-zero estimate: ties resolve to the lowest indices {0, 1, 2}.
  EXPECT_NEAR(detection_hit_rate(CVector::Zero(6), truth), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(top_indices(s, 2), (std::vector<Index>{1, 3}));
}

TEST(SubspaceProjection, ClutterOnlyAndDefectsOnly) {
  radar::RadarConfig c;
  c.num_antennas = 8;
  c.num_freqs = 8;
  c.grid_cells = 16;
  c.num_defects = 2;
  const CMatrix D = radar::build_dictionary(c);
  const CMatrix clutter = radar::synth_clutter(c, 0.0, 4);
  const CVector s0 = sp_baseline(clutter, 2, D);
  EXPECT_LE(s0.norm(), 1e-6 * pseudoinverse(D).norm() * clutter.norm());

  const auto scene = radar::sample_radar_scene(c, D, 5);
  const CMatrix defects_only = unvec(D * scene.s, 8, 8);
  const CVector s1 = sp_baseline(defects_only, 0, D);
  EXPECT_LE((s1 - scene.s).norm(), 1e-8 * scene.s.norm());
  EXPECT_THROW(sp_baseline(defects_only, 8, D), std::invalid_argument);
}

TEST(TensorIo, RoundTripBitExact) {
  Rng rng(9);
  const CMatrix c = draw_normal_matrix(5, 7, rng, Field::complex);
  const CMatrix r = draw_normal_matrix(4, 3, rng, Field::real);
  for (const CMatrix& m : {c, r}) {
    std::stringstream ss;
    write_tensor(ss, make_tensor(m));
    const Tensor t = read_tensor(ss);
    EXPECT_EQ(t.shape, (std::vector<Index>{m.rows(), m.cols()}));
    EXPECT_TRUE(t.matrix() == m);
  }
  std::stringstream ss;
  write_tensor(ss, make_tensor(r));
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "CRPCA-TENSOR v1 dtype=f64 shape=4,3 layout=column-major endian=little");
}

TEST(TensorIo, RejectsMalformed) {
  auto parse = [](const std::string& text) {
    std::stringstream ss(text);
    return read_tensor(ss);
  };
  EXPECT_THROW(parse("NOT-A-TENSOR\n"), IoError);
  EXPECT_THROW(parse("CRPCA-TENSOR v1 dtype=f32 shape=1 layout=column-major endian=little\n"),
               IoError);
  EXPECT_THROW(parse("CRPCA-TENSOR v1 dtype=f64 shape=2 layout=column-major endian=little\nabc"),
               IoError);
  std::stringstream full;
  write_tensor(full, make_tensor(CMatrix::Ones(1, 1)));
  EXPECT_THROW(parse(full.str() + "x"), IoError);
  EXPECT_THROW(load_tensor("/nonexistent/dir/x.tensor"), IoError);
}

TEST(ModelIo, RoundTripGivesIdenticalForward) {
  const auto ops = sample_gaussian_operator(20, 4, 5, 2);
  UnfoldedModel m =
      matched_model(ops, with_decay(SolverConfig{}, DecaySpec{DecayKind::exponential, 1.0}), 3);
  m.layers[1].gamma = 0.123456789012345;
  std::stringstream ss;
  write_model(ss, m);
  const UnfoldedModel back = read_model(ss, ops);
  EXPECT_EQ(back.layers, m.layers);
  EXPECT_EQ(back.decay_kind, m.decay_kind);
  const Scene scene = sample_scene(4, 5, 1, 2, 3);
  const CVector y = observe(ops, scene, 20.0, 3).y;
  const Estimate a = forward(m, y);
  const Estimate b = forward(back, y);
  EXPECT_TRUE(a.L == b.L);
  EXPECT_TRUE(a.S == b.S);

  std::stringstream again;
  write_model(again, m);
  const auto other = sample_gaussian_operator(19, 4, 5, 2);
  EXPECT_THROW(read_model(again, other), IoError);
}

TEST(Config, JsonRoundTripAndHash) {
  ExperimentConfig c;
  c.compression_percent = 25.0;
  c.solver.rho_init = 0.3;
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);

  ExperimentConfig d = c;
  d.train.seed = 2;
  EXPECT_NE(config_hash(d), config_hash(c));
  d = c;
  d.radar.num_defects = 5;
  EXPECT_NE(config_hash(d), config_hash(c));
  d = c;
  d.snr_db = 19.0;
  EXPECT_NE(config_hash(d), config_hash(c));
}

TEST(Config, OverridesAndErrors) {
  const ExperimentConfig c = config_from_json(R"({"model":"sfcw","snr_db":"inf","radar":{"grid_cells":64}})");
  EXPECT_EQ(c.model, ModelKind::sfcw);
  EXPECT_TRUE(std::isinf(c.snr_db));
  EXPECT_EQ(c.radar.grid_cells, 64);
  EXPECT_THROW(config_from_json(R"({"bogus":1})"), std::invalid_argument);
  EXPECT_THROW(config_from_json("{not json"), std::invalid_argument);
  ExperimentConfig k;
  k.K = 450;
  EXPECT_NO_THROW(k.validate());
  k.K = 451;
  EXPECT_THROW(k.validate(), std::invalid_argument);
  EXPECT_EQ(ExperimentConfig{}.measurements(), 450);
}

ExperimentConfig tiny_gaussian() {
  ExperimentConfig c;
  c.M = 6;
  c.N = 5;
  c.rank_r = 1;
  c.sparsity_s = 3;
  c.train_count = 4;
  c.test_count = 3;
  c.seed = 7;
  return c;
}

ExperimentConfig tiny_radar() {
  ExperimentConfig c;
  c.model = ModelKind::sfcw;
  c.radar.num_antennas = 6;
  c.radar.num_freqs = 5;
  c.radar.grid_cells = 16;
  c.radar.num_defects = 2;
  c.compression_percent = 40.0;
  c.train_count = 3;
  c.test_count = 2;
  c.seed = 3;
  return c;
}

void expect_same_dataset(const Dataset& a, const Dataset& b) {
  EXPECT_TRUE(a.ops.lowrank().matrix() == b.ops.lowrank().matrix());
  EXPECT_TRUE(a.ops.sparse().matrix() == b.ops.sparse().matrix());
  EXPECT_EQ(a.ops.sparse_shape(), b.ops.sparse_shape());
  for (auto split : {&Dataset::train, &Dataset::test}) {
    const Split& x = a.*split;
    const Split& y = b.*split;
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_TRUE(x.samples[i].y == y.samples[i].y);
      EXPECT_TRUE(x.samples[i].scene.L == y.samples[i].scene.L);
      EXPECT_TRUE(x.samples[i].scene.S == y.samples[i].scene.S);
    }
    EXPECT_EQ(x.defects, y.defects);
    ASSERT_EQ(x.full_data.size(), y.full_data.size());
    for (std::size_t i = 0; i < x.full_data.size(); ++i) {
      EXPECT_TRUE(x.full_data[i] == y.full_data[i]);
    }
  }
}

TEST(DatasetIo, GaussianSaveLoadAndRegenerate) {
  const Dataset d = generate_dataset(tiny_gaussian());
  EXPECT_EQ(d.ops.measurements(), 15);
  EXPECT_EQ(d.train.size(), 4u);
  const fs::path dir = scratch_dir("gauss");
  save_dataset(d, dir / "a");
  save_dataset(generate_dataset(tiny_gaussian()), dir / "b");
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(file_bytes(e.path()), file_bytes(dir / "b" / e.path().filename())) << e.path();
  }
  EXPECT_FALSE(fs::exists(dir / "a" / "A_s.tensor"));
  expect_same_dataset(load_dataset(dir / "a"), d);
  fs::remove_all(dir);
}

TEST(DatasetIo, RadarSaveLoad) {
  const Dataset d = generate_dataset(tiny_radar());
  EXPECT_EQ(d.ops.measurements(), 12);
  EXPECT_EQ(d.ops.sparse_shape(), (Shape{4, 4}));
  ASSERT_EQ(d.test.defects.size(), 2u);
  EXPECT_EQ(d.test.defects[0].size(), 2u);
  const fs::path dir = scratch_dir("radar");
  const std::string manifest = save_dataset(d, dir);
  EXPECT_NE(manifest.find(config_hash(d.config)), std::string::npos);
  for (const char* f : {"A_l.tensor", "A_s.tensor", "dictionary.tensor", "test_full.tensor",
                        "test_defects.tensor", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  expect_same_dataset(load_dataset(dir), d);
  fs::remove_all(dir);
}

TEST(DatasetIo, SampleIndependentOfSplitSize) {
  ExperimentConfig a = tiny_gaussian();
  ExperimentConfig b = a;
  b.test_count = 6;
  const Dataset da = generate_dataset(a);
  const Dataset db = generate_dataset(b);
  EXPECT_TRUE(da.test.samples[2].y == db.test.samples[2].y);
}

TEST(Experiment, ReportRowsAndErrorCells) {
  const Dataset d = generate_dataset(tiny_gaussian());
  ExperimentSpec spec;
  spec.datasets.push_back({50.0, &d});
  MethodSpec admm{"URPCA-T", MethodKind::admm, DecayKind::constant, {1, 5}, SolverConfig{}, {}};
  MethodSpec trpca{"TRPCA", MethodKind::unfolded, DecayKind::log_det, {}, SolverConfig{}, {}};
  trpca.models.push_back({"/nonexistent/model.bin", std::nullopt, 50.0});
  trpca.models.push_back(
      {"", matched_model(d.ops, with_decay(SolverConfig{}, {DecayKind::log_det, 1.0}), 2), 50.0});
  spec.methods = {admm, trpca};
  const EvalReport r = run_experiment(spec);
  ASSERT_EQ(r.cells.size(), 4u);
  EXPECT_EQ(r.cells[0].layers, 1);
  EXPECT_EQ(r.cells[1].layers, 5);
  EXPECT_FALSE(r.cells[2].error.empty());
  EXPECT_TRUE(std::isnan(r.cells[2].metrics.rmse_L));
  EXPECT_TRUE(r.cells[3].error.empty());
  EXPECT_EQ(r.cells[3].layers, 2);
  EXPECT_TRUE(std::isfinite(r.cells[0].crb_lower));
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.rfind(std::string(EvalReport::kHeader) + "\n", 0), 0u);
  EXPECT_EQ(csv, run_experiment(spec).to_csv());
}

}  // namespace
}  // namespace crpca


namespace crpca {
namespace {

TEST(GridImage, AllZeroIsBlack) {
  const GridImage img = render_grid_image(CVector::Zero(16));
  EXPECT_EQ(img.side, 4);
  const std::string header = "P5\n4 4\n255\n";
  ASSERT_EQ(img.pgm.size(), header.size() + 16);
  EXPECT_EQ(img.pgm.substr(0, header.size()), header);
  for (std::size_t i = header.size(); i < img.pgm.size(); ++i) EXPECT_EQ(img.pgm[i], '\0');
}

TEST(GridImage, SinglePixelAtMatchingCell) {
  CVector s = CVector::Zero(9);
  s(5) = Complex(0.0, -2.0);  // row 1, col 2
  const GridImage img = render_grid_image(s, 3);
  const std::size_t off = std::string("P5\n3 3\n255\n").size();
  for (Index q = 0; q < 9; ++q) {
    const auto px = static_cast<unsigned char>(img.pgm[off + static_cast<std::size_t>(q)]);
    EXPECT_EQ(px, q == 5 ? 255 : 0);
  }
  EXPECT_EQ(img.csv, "0,0,0\n0,0,2\n0,0,0\n");
}

TEST(GridImage, RejectsNonSquare) {
  EXPECT_THROW(render_grid_image(CVector::Zero(10)), std::invalid_argument);
  EXPECT_THROW(render_grid_image(CVector::Zero(16), 3), std::invalid_argument);
}

}  // namespace
}  // namespace crpca
