// Mono-static stepped-frequency CW radar looking at a single-layer panel.
//
// Geometry: a uniform linear array of M transceivers lies on the x axis at
// z = 0, centered at x = 0. The panel's front face is the plane z = standoff.
// The imaging grid is the cross-section of the panel in the (x, z) plane:
// g columns spanning panel_width along x and g rows spanning panel_height in
// depth behind the front face. Cells are numbered row-major from the
// top-left, i.e. q = row * g + col with row 0 the shallowest row and col 0
// the most negative x.
//
// Measurement layout: Y is M x N (antenna x frequency), vec(Y) is column-major
// so entry (m, n) sits at index m + M*n. The dictionary D is ordered the same
// way, which makes vec(Y_defects) = D * s hold exactly.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "crpca/gaussian_model.hpp"
#include "crpca/operators.hpp"

namespace crpca::radar {

using Point3 = std::array<double, 3>;

inline constexpr double kSpeedOfLight = 299792458.0;

struct RadarConfig {
  double carrier_hz = 300e9;
  double bandwidth_hz = 5e9;
  Index num_freqs = 30;
  Index num_antennas = 30;
  /// Zero selects half a carrier wavelength.
  double antenna_spacing_m = 0.0;
  double standoff_m = 1.0;
  double panel_width_m = 0.5;
  double panel_height_m = 0.5;
  Index grid_cells = 256;
  Index num_defects = 6;
  Index clutter_rank = 2;
  double clutter_to_signal_db = 10.0;
  double speed_of_light = kSpeedOfLight;

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
  Index grid_side() const;
  double spacing() const;
  Index measurements() const { return num_antennas * num_freqs; }
};

/// f_n = f_c - B/2 + n * B/(N-1), n = 0..N-1.
RVector frequencies(const RadarConfig& config);
std::vector<Point3> antenna_positions(const RadarConfig& config);
std::vector<Point3> grid_points(const RadarConfig& config);

/// Two-way free-space delay 2*|a - t|/c.
double round_trip_delay(const Point3& antenna, const Point3& target, double c);

/// D (MN x Q) with D(m + M*n, q) = exp(-j 2 pi f_n tau_{m,q}).
CMatrix build_dictionary(const RadarConfig& config);

/// Strictly increasing indices into vec(Y) (0-based).
struct SelectionMatrix {
  std::vector<Index> selected_indices;
  Index total = 0;

  Index rows() const { return static_cast<Index>(selected_indices.size()); }
  CMatrix dense() const;
  CVector apply(const CVector& v) const;
};

SelectionMatrix sample_selection(Index K, Index total, std::uint64_t seed);
SelectionMatrix make_selection(std::vector<Index> indices, Index total);

struct RadarScene {
  /// Defect amplitudes on the grid, length Q.
  CVector s;
  std::vector<Index> defect_indices;
  /// Layered-structure clutter, M x N.
  CMatrix Y_l;
  /// Noiseless total response Y_l + unvec(D s).
  CMatrix Y;
};

/// Clutter sum_i beta_i a_i f_i^T with f_i(n) = exp(-j 2 pi f_n tau_i),
/// tau_1 = 2*standoff/c (front face) and later returns spread evenly over the
/// panel depth. a_1 is all ones (planar front face at normal incidence);
/// deeper returns carry random per-antenna phases. The result is scaled so
/// ||Y_l||_F^2 = signal_energy * 10^(clutter_to_signal_db/10). A zero
/// signal_energy scales to unit Frobenius norm instead.
CMatrix synth_clutter(const RadarConfig& config, double signal_energy, std::uint64_t seed);

/// P defects with unit magnitude and uniform phase at distinct random cells,
/// plus clutter relative to the defect response.
RadarScene sample_radar_scene(const RadarConfig& config, const CMatrix& dictionary,
                              std::uint64_t seed);

/// A_l = Phi, A_s = Phi * D, with S shaped as the g x g grid image.
MeasurementOperators build_radar_operators(const RadarConfig& config, const CMatrix& dictionary,
                                           const SelectionMatrix& selection, AdjointMode mode);

/// y_cs = Phi vec(Y + Z) with Z scaled so
/// ||Phi vec(Y)||^2 / ||Phi vec(Z)||^2 equals the SNR exactly.
CVector radar_measure(const RadarScene& scene, const SelectionMatrix& selection, double snr_db,
                      std::uint64_t seed);

struct RadarObservation {
  CVector y_cs;
  MeasurementOperators ops;
};

RadarObservation radar_observe(const RadarConfig& config, const RadarScene& scene,
                               const CMatrix& dictionary, const SelectionMatrix& selection,
                               double snr_db, std::uint64_t seed,
                               AdjointMode mode = AdjointMode::hermitian);

/// Ground truth in the generic (L, S) form: L = Y_l, S = unvec(s, g, g).
Scene as_scene(const RadarConfig& config, const RadarScene& scene);

}  // namespace crpca::radar
