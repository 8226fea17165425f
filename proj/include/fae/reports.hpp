#pragma once

#include <string>
#include <vector>

#include "fae/hfae.hpp"
#include "fae/model.hpp"
#include "fae/trainer.hpp"

namespace fae {

/// epoch,term1,term2,l1,total,val_total. term2 is the unweighted sum of the
/// masked reconstruction terms; hfae reports add one group<i> column per group.
void write_loss_csv(const std::string& path, const TrainReport& report);

/// rank,feature,weight
void write_selection_csv(const std::string& path, const SelectionResult& sel);

/// group,feature,weight (group is 1-based).
void write_hierarchy_csv(const std::string& path, const HierarchicalSelection& sel);

struct MetricsRow {
  std::string dataset;
  std::string method;
  Index k = 0;
  std::uint64_t seed = 0;
  double recon_mse = 0.0;
  /// NaN when the dataset has no labels.
  double accuracy = 0.0;
};

inline constexpr const char* kMetricsHeader = "dataset,method,k,seed,recon_mse,accuracy";

std::string format_metrics_row(const MetricsRow& row);
/// Appends `row`, writing the header first if the file is new or empty.
void append_metrics_row(const std::string& path, const MetricsRow& row);

/// Fixed-format real number used by every CSV writer (17 significant digits).
std::string format_real(double v);

}  // namespace fae
