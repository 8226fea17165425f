#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fae/hfae.hpp"
#include "fae/model.hpp"
#include "fae/trainer.hpp"

namespace fae {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Trained model plus everything needed to replay it. Layout on disk is
/// described in docs/checkpoint-format.md.
struct Checkpoint {
  std::string method;  // fae | iae | ae | hfae
  Hyperparams hp;
  std::optional<HierarchyParams> hierarchy;
  ModelParams params;
  std::string rng_algorithm;
  int threads = 1;
  /// Epoch (1-based) whose parameters were kept; 0 for the initialization.
  int epoch = 0;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws ParseError on a bad magic, an unknown version or a truncated file.
Checkpoint read_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const std::string& method, const ModelParams& params,
                           const TrainReport& report,
                           const std::optional<HierarchyParams>& hierarchy = std::nullopt);

/// Feature subsets a checkpoint selects: one for fae/iae/ae, h for hfae.
std::vector<SelectionResult> checkpoint_selections(const Checkpoint& ckpt);

}  // namespace fae
