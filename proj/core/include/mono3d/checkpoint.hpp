#pragma once

#include <filesystem>
#include <vector>

#include "mono3d/decoder.hpp"
#include "mono3d/toy_data.hpp"

namespace mono3d {

struct Checkpoint {
  DecoderParams params;
  TrainConfig train;
  ToyEncodingConfig encoding;
  std::vector<double> loss_history;
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(std::string_view text);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// "epoch,mean_loss" header followed by one row per epoch (1-based).
std::string loss_history_csv(const std::vector<double>& history);

}  // namespace mono3d
