#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fae/linalg.hpp"

namespace fae {

enum class ScalingMode { kNone, kMinMax, kZScore };

std::string to_string(ScalingMode mode);
ScalingMode parse_scaling_mode(const std::string& text);

/// Per-feature affine map v -> (v - offset) * factor, fitted on training rows.
struct FeatureScaler {
  ScalingMode mode = ScalingMode::kNone;
  Vector offset;
  Vector factor;

  Matrix apply(const Matrix& x) const;
};

/// Min-max to [0, 1]; constant features map to 0.
FeatureScaler fit_minmax(const Matrix& train);
/// Zero mean, unit variance; constant features map to 0.
FeatureScaler fit_zscore(const Matrix& train);

struct Provenance {
  std::string source;
  std::string format;
  /// "pixel/255" for IDX images, the scaler mode otherwise.
  std::string normalization = "none";
  std::size_t missing_cells = 0;
  std::vector<double> fit_offset;
  std::vector<double> fit_factor;
};

struct Dataset {
  Matrix x;
  std::optional<std::vector<int>> labels;
  std::vector<std::string> feature_names;
  Provenance provenance;

  Index samples() const { return x.rows(); }
  Index features() const { return x.cols(); }
  /// Rows `rows` of this dataset, labels included.
  Dataset subset(const std::vector<Index>& rows) const;
  /// Throws ContractError on a label-length mismatch or empty matrix.
  void validate() const;
};

/// A column named by header text or by 0-based position.
using ColumnRef = std::variant<std::string, Index>;

/// Comma-separated numeric file. Empty cells, "NA", "NaN" and "?" load as
/// NaN and are counted as missing; call impute_missing before training.
Dataset load_csv(const std::string& path, bool has_header,
                 const std::optional<ColumnRef>& label_column = std::nullopt);
void write_csv(const std::string& path, const Dataset& d, bool with_header = true);

/// IDX images (magic 0x00000803) and labels (0x00000801); pixels divided by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);
Dataset load_idx_images(const std::string& images_path);

/// Replaces NaN cells with the mean of the same feature over `fit_rows`.
/// Returns the number of cells filled.
std::size_t impute_missing(Dataset& d, const std::vector<Index>& fit_rows);

/// Fits min-max scaling on the whole of `d` and applies it.
Dataset normalize_minmax(const Dataset& d);

struct SplitSpec {
  double train = 0.72;
  double val = 0.08;
  double test = 0.20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<Index> train, val, test;
};

/// Seeded shuffle, then contiguous blocks of floor(n*val), floor(n*test)
/// and the remainder for training.
SplitIndices split_indices(Index n, const SplitSpec& spec);

struct DatasetSplits {
  Dataset train, val, test;
};

/// Splits, imputes missing cells from training means, then scales every part
/// with a scaler fitted on the training part (`mode`; kNone leaves values).
DatasetSplits split(const Dataset& d, const SplitSpec& spec,
                    ScalingMode mode = ScalingMode::kMinMax);

/// Blocks of correlated features: each block shares a U[0,1) latent signal,
/// each feature adds N(0, noise_std). Labels are the block with the largest
/// latent value, so the data also supports classification.
Dataset synth_blocks(Index n, Index blocks, Index per_block, double noise_std, std::uint64_t seed);

}  // namespace fae
