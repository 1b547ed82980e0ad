// Synthetic datasets for both experiment models and their on-disk layout.
//
// Directory layout:
//   manifest.json          config, config hash, resolved K, seeds, file list
//   A_l.tensor, A_s.tensor measurement operators (A_s omitted when shared)
//   dictionary.tensor      sfcw only: full MN x Q dictionary
//   <split>_y.tensor       K x n measurements
//   <split>_L.tensor       MN x n vec(L) ground truth
//   <split>_S.tensor       |S| x n vec(S) ground truth
//   <split>_full.tensor    sfcw only: MN x n noisy uncompressed data
//   <split>_defects.tensor sfcw only: P x n defect cell indices
// with <split> in {train, test}.

#pragma once

#include <filesystem>
#include <vector>

#include "crpca/config.hpp"
#include "crpca/unfolded.hpp"

namespace crpca {

struct Split {
  std::vector<Sample> samples;
  /// sfcw only: vec of the noisy full M x N data, for the SP baseline.
  std::vector<CVector> full_data;
  /// sfcw only: true defect cells per sample.
  std::vector<std::vector<Index>> defects;

  std::size_t size() const { return samples.size(); }
};

struct Dataset {
  ExperimentConfig config;
  MeasurementOperators ops;
  /// sfcw only.
  CMatrix dictionary;
  Split train;
  Split test;
};

/// Deterministic in the config (seed included). Sample i of a split only
/// depends on (seed, split, i).
Dataset generate_dataset(const ExperimentConfig& config);

/// Writes the directory; returns the manifest text.
std::string save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// Seed streams used by generate_dataset.
enum class SeedStream : std::uint64_t {
  operators = 1,
  train_scene = 2,
  train_noise = 3,
  test_scene = 4,
  test_noise = 5,
  selection = 6,
};

}  // namespace crpca
