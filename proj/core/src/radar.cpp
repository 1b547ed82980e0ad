#include "crpca/radar.hpp"

#include <cmath>
#include <numbers>

namespace crpca::radar {

void RadarConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("radar config: " + what); };
  if (!(carrier_hz > 0.0)) fail("carrier frequency must be positive");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth must be positive");
  if (num_freqs < 2) fail("need at least two frequencies");
  if (num_antennas < 1) fail("need at least one antenna");
  if (antenna_spacing_m < 0.0) fail("antenna spacing must be nonnegative");
  if (!(standoff_m > 0.0)) fail("standoff must be positive");
  if (!(panel_width_m > 0.0) || !(panel_height_m > 0.0)) fail("panel dimensions must be positive");
  if (grid_cells < 1) fail("grid must have at least one cell");
  const auto g = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(grid_cells))));
  if (g * g != grid_cells) fail("grid_cells must be a perfect square");
  if (num_defects < 0 || num_defects > grid_cells) fail("num_defects must lie in [0, Q]");
  if (clutter_rank < 1) fail("clutter rank must be at least 1");
  if (!(speed_of_light > 0.0)) fail("speed of light must be positive");
}

Index RadarConfig::grid_side() const {
  return static_cast<Index>(std::llround(std::sqrt(static_cast<double>(grid_cells))));
}

double RadarConfig::spacing() const {
  return antenna_spacing_m > 0.0 ? antenna_spacing_m : 0.5 * speed_of_light / carrier_hz;
}

RVector frequencies(const RadarConfig& config) {
  RVector f(config.num_freqs);
  const double step = config.bandwidth_hz / static_cast<double>(config.num_freqs - 1);
  for (Index n = 0; n < config.num_freqs; ++n) {
    f(n) = config.carrier_hz - 0.5 * config.bandwidth_hz + static_cast<double>(n) * step;
  }
  return f;
}

std::vector<Point3> antenna_positions(const RadarConfig& config) {
  std::vector<Point3> pos;
  pos.reserve(static_cast<std::size_t>(config.num_antennas));
  const double d = config.spacing();
  const double center = 0.5 * static_cast<double>(config.num_antennas - 1);
  for (Index m = 0; m < config.num_antennas; ++m) {
    pos.push_back({(static_cast<double>(m) - center) * d, 0.0, 0.0});
  }
  return pos;
}

std::vector<Point3> grid_points(const RadarConfig& config) {
  config.validate();
  const Index g = config.grid_side();
  const double dx = config.panel_width_m / static_cast<double>(g);
  const double dz = config.panel_height_m / static_cast<double>(g);
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(config.grid_cells));
  for (Index row = 0; row < g; ++row) {
    for (Index col = 0; col < g; ++col) {
      pts.push_back({-0.5 * config.panel_width_m + (static_cast<double>(col) + 0.5) * dx, 0.0,
                     config.standoff_m + (static_cast<double>(row) + 0.5) * dz});
    }
  }
  return pts;
}

double round_trip_delay(const Point3& antenna, const Point3& target, double c) {
  const double dx = antenna[0] - target[0];
  const double dy = antenna[1] - target[1];
  const double dz = antenna[2] - target[2];
  return 2.0 * std::sqrt(dx * dx + dy * dy + dz * dz) / c;
}

namespace {

Complex steering(double freq, double delay) {
  return std::polar(1.0, -2.0 * std::numbers::pi * freq * delay);
}

}  // namespace

CMatrix build_dictionary(const RadarConfig& config) {
  config.validate();
  const RVector f = frequencies(config);
  const auto antennas = antenna_positions(config);
  const auto cells = grid_points(config);
  const Index M = config.num_antennas;
  const Index N = config.num_freqs;
  CMatrix d(M * N, config.grid_cells);
  for (Index q = 0; q < config.grid_cells; ++q) {
    for (Index m = 0; m < M; ++m) {
      const double tau = round_trip_delay(antennas[static_cast<std::size_t>(m)],
                                          cells[static_cast<std::size_t>(q)],
                                          config.speed_of_light);
      for (Index n = 0; n < N; ++n) {
        d(m + M * n, q) = steering(f(n), tau);
      }
    }
  }
  return d;
}

CMatrix SelectionMatrix::dense() const {
  CMatrix phi = CMatrix::Zero(rows(), total);
  for (Index k = 0; k < rows(); ++k) {
    phi(k, selected_indices[static_cast<std::size_t>(k)]) = 1.0;
  }
  return phi;
}

CVector SelectionMatrix::apply(const CVector& v) const {
  if (v.size() != total) {
    throw std::invalid_argument("selection applied to vector of wrong length");
  }
  CVector out(rows());
  for (Index k = 0; k < rows(); ++k) {
    out(k) = v(selected_indices[static_cast<std::size_t>(k)]);
  }
  return out;
}

SelectionMatrix make_selection(std::vector<Index> indices, Index total) {
  if (static_cast<Index>(indices.size()) > total) {
    throw std::invalid_argument("selection: K exceeds M*N");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= total || (i > 0 && indices[i] <= indices[i - 1])) {
      throw std::invalid_argument("selection indices must be strictly increasing and in range");
    }
  }
  return {std::move(indices), total};
}

SelectionMatrix sample_selection(Index K, Index total, std::uint64_t seed) {
  if (K < 1 || K > total) {
    throw std::invalid_argument("selection: need 1 <= K <= M*N, got K=" + std::to_string(K));
  }
  Rng rng(seed);
  return make_selection(sample_without_replacement(total, K, rng), total);
}

CMatrix synth_clutter(const RadarConfig& config, double signal_energy, std::uint64_t seed) {
  config.validate();
  const Index M = config.num_antennas;
  const Index R = config.clutter_rank;
  const RVector f = frequencies(config);
  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  CMatrix clutter = CMatrix::Zero(M, config.num_freqs);
  for (Index i = 0; i < R; ++i) {
    const double depth =
        R > 1 ? config.panel_height_m * static_cast<double>(i) / static_cast<double>(R - 1) : 0.0;
    const double tau = 2.0 * (config.standoff_m + depth) / config.speed_of_light;
    CVector across(M);
    for (Index m = 0; m < M; ++m) {
      across(m) = i == 0 ? Complex(1.0, 0.0) : std::polar(1.0, phase(rng));
    }
    CVector along(config.num_freqs);
    for (Index n = 0; n < config.num_freqs; ++n) {
      along(n) = steering(f(n), tau);
    }
    const Complex beta = std::polar(i == 0 ? 1.0 : 0.5, phase(rng));
    clutter.noalias() += beta * across * along.transpose();
  }
  const double target = signal_energy > 0.0
                            ? std::sqrt(signal_energy * std::pow(10.0, config.clutter_to_signal_db / 10.0))
                            : 1.0;
  clutter *= target / clutter.norm();
  return clutter;
}

RadarScene sample_radar_scene(const RadarConfig& config, const CMatrix& dictionary,
                              std::uint64_t seed) {
  config.validate();
  if (dictionary.rows() != config.measurements() || dictionary.cols() != config.grid_cells) {
    throw std::invalid_argument("dictionary does not match the radar configuration");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  RadarScene scene;
  scene.defect_indices = sample_without_replacement(config.grid_cells, config.num_defects, rng);
  scene.s = CVector::Zero(config.grid_cells);
  for (Index q : scene.defect_indices) {
    scene.s(q) = std::polar(1.0, phase(rng));
  }
  const CMatrix defects = unvec(dictionary * scene.s, config.num_antennas, config.num_freqs);
  const std::uint64_t clutter_seed = rng();
  scene.Y_l = synth_clutter(config, defects.squaredNorm(), clutter_seed);
  scene.Y = scene.Y_l + defects;
  return scene;
}

MeasurementOperators build_radar_operators(const RadarConfig& config, const CMatrix& dictionary,
                                           const SelectionMatrix& selection, AdjointMode mode) {
  if (selection.total != config.measurements()) {
    throw std::invalid_argument("selection does not cover M*N samples");
  }
  CMatrix phi = selection.dense();
  CMatrix phi_d(selection.rows(), dictionary.cols());
  for (Index k = 0; k < selection.rows(); ++k) {
    phi_d.row(k) = dictionary.row(selection.selected_indices[static_cast<std::size_t>(k)]);
  }
  const Index g = config.grid_side();
  return MeasurementOperators::create(std::move(phi), std::move(phi_d),
                                      {config.num_antennas, config.num_freqs}, {g, g}, mode);
}

CVector radar_measure(const RadarScene& scene, const SelectionMatrix& selection, double snr_db,
                      std::uint64_t seed) {
  const CVector clean = selection.apply(vec(scene.Y));
  if (std::isinf(snr_db) && snr_db > 0) {
    return clean;
  }
  if (std::isnan(snr_db)) {
    throw std::invalid_argument("SNR must not be NaN");
  }
  Rng rng(seed);
  CMatrix z = draw_normal_matrix(scene.Y.rows(), scene.Y.cols(), rng, Field::complex);
  const CVector z_sel = selection.apply(vec(z));
  const double zn = z_sel.norm();
  const double target = clean.norm() / std::pow(10.0, snr_db / 20.0);
  if (zn == 0.0 || clean.norm() == 0.0) {
    return clean;
  }
  return clean + z_sel * (target / zn);
}

RadarObservation radar_observe(const RadarConfig& config, const RadarScene& scene,
                               const CMatrix& dictionary, const SelectionMatrix& selection,
                               double snr_db, std::uint64_t seed, AdjointMode mode) {
  return {radar_measure(scene, selection, snr_db, seed),
          build_radar_operators(config, dictionary, selection, mode)};
}

Scene as_scene(const RadarConfig& config, const RadarScene& scene) {
  const Index g = config.grid_side();
  Scene out;
  out.L = scene.Y_l;
  out.S = unvec(scene.s, g, g);
  out.rank_r = config.clutter_rank;
  out.support_size_s = static_cast<Index>(scene.defect_indices.size());
  out.support_indices = scene.defect_indices;
  return out;
}

}  // namespace crpca::radar
