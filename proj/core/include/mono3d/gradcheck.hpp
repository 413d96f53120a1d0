#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mono3d/attention.hpp"
#include "mono3d/decoder.hpp"

namespace mono3d {

/// Worst normwise relative error of one parameter tensor:
/// max_i |analytic_i - numeric_i| / max(max_i |analytic_i|, max_i |numeric_i|, 1e-10).
struct GradGroupError {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t size = 0;
};

double worst_error(const std::vector<GradGroupError>& groups);

/// Central finite differences of loss(predict(seq, params), target) against backward().
std::vector<GradGroupError> decoder_gradcheck(const TokenSequence& seq, const DecoderParams& params,
                                              const RawHeadOutput& target, double step = 1e-6);

/// Central finite differences of spatial_mining_objective against spatial_mining_backward().
std::vector<GradGroupError> spatial_mining_gradcheck(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                                     const SpatialMiningParams& params, const DepthMap& depth_gt,
                                                     const Eigen::MatrixXd& d_tokens, double depth_weight,
                                                     double step = 1e-6);

struct DecoderInstance {
  TokenSequence sequence;
  DecoderParams params;
  RawHeadOutput target;
};

/// Random well-conditioned instance: Gaussian embeddings, params and targets.
DecoderInstance random_decoder_instance(std::uint64_t seed, int seq_len, const DecoderConfig& config);

struct MiningInstance {
  FeatureGrid local;
  TokenMatrix vit_tokens;
  SpatialMiningParams params;
  DepthMap depth_gt;
  Eigen::MatrixXd d_tokens;
};

MiningInstance random_mining_instance(std::uint64_t seed, int height, int width, int channels, int num_tokens,
                                      int d_k);

}  // namespace mono3d
