#include "crpca/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "crpca/tensor_io.hpp"
#include "json.hpp"

namespace crpca {

namespace {

std::uint64_t seed_of(const ExperimentConfig& c, SeedStream s, std::uint64_t i = 0) {
  return derive_seed(c.seed, static_cast<std::uint64_t>(s), i);
}

Split gaussian_split(const ExperimentConfig& c, const MeasurementOperators& ops, Index count,
                     SeedStream scene_stream, SeedStream noise_stream) {
  Split split;
  for (Index i = 0; i < count; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    Scene scene = sample_scene(c.M, c.N, c.rank_r, c.sparsity_s, seed_of(c, scene_stream, u));
    CVector y = observe(ops, scene, c.snr_db, seed_of(c, noise_stream, u)).y;
    split.samples.push_back({std::move(y), std::move(scene)});
  }
  return split;
}

Split radar_split(const ExperimentConfig& c, const CMatrix& dictionary,
                  const radar::SelectionMatrix& sel, Index count, SeedStream scene_stream,
                  SeedStream noise_stream) {
  Split split;
  const radar::SelectionMatrix full = radar::make_selection(
      [&] {
        std::vector<Index> all(static_cast<std::size_t>(sel.total));
        for (Index k = 0; k < sel.total; ++k) all[static_cast<std::size_t>(k)] = k;
        return all;
      }(),
      sel.total);
  for (Index i = 0; i < count; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const radar::RadarScene rs =
        radar::sample_radar_scene(c.radar, dictionary, seed_of(c, scene_stream, u));
    // One noise draw serves both; each is scaled to the exact SNR on its own
    // sample set.
    const std::uint64_t noise = seed_of(c, noise_stream, u);
    CVector y = radar::radar_measure(rs, sel, c.snr_db, noise);
    const CVector y_full = radar::radar_measure(rs, full, c.snr_db, noise);
    split.samples.push_back({std::move(y), radar::as_scene(c.radar, rs)});
    split.full_data.push_back(y_full);
    split.defects.push_back(rs.defect_indices);
  }
  return split;
}

Tensor stack(const std::vector<CVector>& cols, Index rows) {
  CMatrix m(rows, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    m.col(static_cast<Index>(i)) = cols[i];
  }
  return make_tensor(m);
}

std::vector<CVector> unstack(const CMatrix& m) {
  std::vector<CVector> cols;
  for (Index j = 0; j < m.cols(); ++j) cols.emplace_back(m.col(j));
  return cols;
}

}  // namespace

Dataset generate_dataset(const ExperimentConfig& config) {
  config.validate();
  Dataset d;
  d.config = config;
  const Index K = config.measurements();
  if (config.model == ModelKind::gaussian) {
    d.ops = sample_gaussian_operator(K, config.M, config.N, seed_of(config, SeedStream::operators),
                                     config.solver.adjoint_mode);
    d.train = gaussian_split(config, d.ops, config.train_count, SeedStream::train_scene,
                             SeedStream::train_noise);
    d.test = gaussian_split(config, d.ops, config.test_count, SeedStream::test_scene,
                            SeedStream::test_noise);
  } else {
    const auto& rc = config.radar;
    d.dictionary = radar::build_dictionary(rc);
    const auto sel =
        radar::sample_selection(K, rc.measurements(), seed_of(config, SeedStream::selection));
    d.ops = radar::build_radar_operators(rc, d.dictionary, sel, config.solver.adjoint_mode);
    d.train = radar_split(config, d.dictionary, sel, config.train_count, SeedStream::train_scene,
                          SeedStream::train_noise);
    d.test = radar_split(config, d.dictionary, sel, config.test_count, SeedStream::test_scene,
                         SeedStream::test_noise);
  }
  return d;
}

std::string save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  const auto& c = data.config;
  nlohmann::json files = nlohmann::json::array();
  auto put = [&](const std::string& name, const Tensor& t) {
    save_tensor(dir / name, t);
    files.push_back(name);
  };
  put("A_l.tensor", make_tensor(data.ops.lowrank().matrix()));
  if (!data.ops.shared()) {
    put("A_s.tensor", make_tensor(data.ops.sparse().matrix()));
  }
  if (c.model == ModelKind::sfcw) {
    put("dictionary.tensor", make_tensor(data.dictionary));
  }
  const Shape ls = data.ops.lowrank_shape();
  const Shape ss = data.ops.sparse_shape();
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [name, split] : {std::pair<std::string, const Split*>{"train", &data.train},
                                    {"test", &data.test}}) {
    std::vector<CVector> y, l, s;
    for (const auto& smp : split->samples) {
      y.push_back(smp.y);
      l.push_back(vec(smp.scene.L));
      s.push_back(vec(smp.scene.S));
    }
    put(name + "_y.tensor", stack(y, data.ops.measurements()));
    put(name + "_L.tensor", stack(l, ls.size()));
    put(name + "_S.tensor", stack(s, ss.size()));
    if (c.model == ModelKind::sfcw) {
      put(name + "_full.tensor", stack(split->full_data, ls.size()));
      std::vector<CVector> idx;
      for (const auto& d : split->defects) {
        CVector v(static_cast<Index>(d.size()));
        for (std::size_t k = 0; k < d.size(); ++k) v(static_cast<Index>(k)) = static_cast<double>(d[k]);
        idx.push_back(v);
      }
      put(name + "_defects.tensor", stack(idx, c.radar.num_defects));
    }
    counts[name] = split->size();
  }
  nlohmann::json seeds = nlohmann::json::object();
  seeds["master"] = c.seed;
  seeds["operators"] = seed_of(c, SeedStream::operators);
  seeds["selection"] = seed_of(c, SeedStream::selection);
  seeds["train_scene_stream"] = static_cast<std::uint64_t>(SeedStream::train_scene);
  seeds["train_noise_stream"] = static_cast<std::uint64_t>(SeedStream::train_noise);
  seeds["test_scene_stream"] = static_cast<std::uint64_t>(SeedStream::test_scene);
  seeds["test_noise_stream"] = static_cast<std::uint64_t>(SeedStream::test_noise);
  nlohmann::json manifest = {
      {"format", "crpca-dataset v1"},
      {"config", nlohmann::json::parse(to_json(c))},
      {"config_hash", config_hash(c)},
      {"K", data.ops.measurements()},
      {"lowrank_shape", {ls.rows, ls.cols}},
      {"sparse_shape", {ss.rows, ss.cols}},
      {"counts", counts},
      {"seeds", seeds},
      {"files", files}};
  const std::string text = manifest.dump(2) + "\n";
  save_text(dir / "manifest.json", text);
  return text;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(load_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  Dataset d;
  d.config = config_from_json(manifest.at("config").dump());
  const auto& c = d.config;
  const Shape ls = c.data_shape();
  const Shape ss = c.model == ModelKind::sfcw
                       ? Shape{c.radar.grid_side(), c.radar.grid_side()}
                       : ls;
  const CMatrix a_l = load_tensor(dir / "A_l.tensor").matrix();
  const CMatrix a_s =
      std::filesystem::exists(dir / "A_s.tensor") ? load_tensor(dir / "A_s.tensor").matrix() : a_l;
  if (a_l.rows() != c.measurements()) {
    throw IoError(dir.string() + ": operator rows do not match the resolved K");
  }
  d.ops = MeasurementOperators::create(a_l, a_s, ls, ss, c.solver.adjoint_mode);
  if (c.model == ModelKind::sfcw) {
    d.dictionary = load_tensor(dir / "dictionary.tensor").matrix();
  }
  for (const auto& [name, split] :
       {std::pair<std::string, Split*>{"train", &d.train}, {"test", &d.test}}) {
    const CMatrix y = load_tensor(dir / (name + "_y.tensor")).matrix();
    const CMatrix l = load_tensor(dir / (name + "_L.tensor")).matrix();
    const CMatrix s = load_tensor(dir / (name + "_S.tensor")).matrix();
    if (l.cols() != y.cols() || s.cols() != y.cols()) {
      throw IoError(dir.string() + ": " + name + " split tensors disagree on sample count");
    }
    for (Index i = 0; i < y.cols(); ++i) {
      Scene scene;
      scene.L = unvec(l.col(i), ls);
      scene.S = unvec(s.col(i), ss);
      scene.support_indices = support_of(scene.S);
      scene.support_size_s = static_cast<Index>(scene.support_indices.size());
      scene.rank_r = c.model == ModelKind::sfcw ? c.radar.clutter_rank : c.rank_r;
      split->samples.push_back({y.col(i), std::move(scene)});
    }
    if (c.model == ModelKind::sfcw) {
      split->full_data = unstack(load_tensor(dir / (name + "_full.tensor")).matrix());
      const CMatrix idx = load_tensor(dir / (name + "_defects.tensor")).matrix();
      for (Index i = 0; i < idx.cols(); ++i) {
        std::vector<Index> v;
        for (Index k = 0; k < idx.rows(); ++k) v.push_back(static_cast<Index>(std::lround(idx(k, i).real())));
        split->defects.push_back(std::move(v));
      }
    }
  }
  return d;
}

}  // namespace crpca
