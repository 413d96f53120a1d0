#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mono3d/decoder.hpp"
#include "mono3d/scene.hpp"

namespace mono3d {

/// Synthetic stand-in for the image/caption tokens of a grounding query.
/// Image tokens are fixed random linear encodings of the (standardized)
/// target head outputs plus optional Gaussian noise; caption tokens and the
/// <pos> marker are fixed random vectors that carry no geometry.
struct ToyEncodingConfig {
  int d_model = 32;
  int num_caption_tokens = 2;
  int num_image_tokens = 4;
  double noise_sigma = 0.0;
  std::uint64_t seed = 7;
};

class ToyEncoder {
 public:
  explicit ToyEncoder(const ToyEncodingConfig& config);

  const ToyEncodingConfig& config() const { return config_; }

  /// `noise` may be null only when noise_sigma is 0.
  TokenSequence encode(const RawHeadOutput& target, std::mt19937_64* noise) const;

 private:
  ToyEncodingConfig config_;
  std::vector<Eigen::MatrixXd> image_maps_;  // (d_model, 12) each
  Eigen::MatrixXd caption_tokens_;           // (num_caption_tokens, d_model)
  Eigen::RowVectorXd pos_marker_;
};

struct ToySample {
  std::string image_id;
  std::string object_id;
  TrainSample sample;
};

/// One sample per ground-truth object, targets from raw_from_box.
std::vector<ToySample> build_toy_dataset(const std::vector<SceneRecord>& scenes, const DatasetProfile& profile,
                                         const ToyEncoder& encoder, std::uint64_t noise_seed = 0);

std::vector<TrainSample> train_samples(const std::vector<ToySample>& samples);

/// Runs the decoder on every sample and wraps the outputs as raw-mode predictions.
std::vector<PredictionRecord> predict_toy(const std::vector<ToySample>& samples, const DecoderParams& params);

}  // namespace mono3d
