#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mono3d {

/// Row-major cell layout: row index = y * width + x, one column per channel.
struct FeatureGrid {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd cells;

  FeatureGrid() = default;
  FeatureGrid(int h, int w, int channels) : height(h), width(w), cells(Eigen::MatrixXd::Zero(h * w, channels)) {}

  int channels() const { return static_cast<int>(cells.cols()); }
  int num_cells() const { return height * width; }
  double& at(int y, int x, int c) { return cells(y * width + x, c); }
  double at(int y, int x, int c) const { return cells(y * width + x, c); }
};

/// Per-cell depth in meters; cells without supervision carry valid = false.
struct DepthMap {
  int height = 0;
  int width = 0;
  Eigen::VectorXd values;
  std::vector<bool> valid;

  DepthMap() = default;
  DepthMap(int h, int w) : height(h), width(w), values(Eigen::VectorXd::Zero(h * w)), valid(h * w, true) {}
};

using TokenMatrix = Eigen::MatrixXd;  // (num_tokens, channels)

/// 1x1 convolution: y = x * weight + bias, applied independently at every cell.
struct CellLinearMap {
  Eigen::MatrixXd weight;  // (in, out)
  Eigen::RowVectorXd bias;  // (out)

  static CellLinearMap identity(int channels);
  FeatureGrid apply(const FeatureGrid& grid) const;
};

struct DepthHeadParams {
  Eigen::VectorXd weight;  // (channels)
  double bias = 0.0;
};

/// Single-head attention projections, each (channels, d_k).
struct AttentionParams {
  Eigen::MatrixXd W_Q;
  Eigen::MatrixXd W_K;
  Eigen::MatrixXd W_V;

  int d_k() const { return static_cast<int>(W_Q.cols()); }
};

std::pair<FeatureGrid, FeatureGrid> branch_split(const FeatureGrid& local, const CellLinearMap& spatial_map,
                                                 const CellLinearMap& rgb_map);

/// Linear projection to one channel, then softplus so depth stays positive.
DepthMap depth_head(const FeatureGrid& spatial, const DepthHeadParams& params);

/// Mean |pred - gt| over cells valid in both maps. Throws EmptyValidMask if none are.
double depth_l1_loss(const DepthMap& pred, const DepthMap& gt);

FeatureGrid add_fuse(const FeatureGrid& spatial, const FeatureGrid& rgb);

/// softmax(Q K^T / sqrt(d_k)) V with queries from the global tokens and keys/values
/// from every grid cell. Output is (num_tokens, d_k).
TokenMatrix cross_branch_attention(const TokenMatrix& tokens, const FeatureGrid& spatial_local,
                                   const AttentionParams& params);

/// Row-wise softmax with max subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// ---------------------------------------------------------------------------
// Backward passes. Each takes the upstream gradient of a scalar objective.

struct AttentionGradients {
  Eigen::MatrixXd W_Q, W_K, W_V;
  Eigen::MatrixXd tokens;  // d/d T_vit
  Eigen::MatrixXd cells;   // d/d flattened F_spatial-local
};

AttentionGradients cross_branch_attention_backward(const TokenMatrix& tokens, const FeatureGrid& spatial_local,
                                                   const AttentionParams& params, const Eigen::MatrixXd& d_out);

/// d loss / d pred.values (subgradient 0 at exact ties).
Eigen::VectorXd depth_l1_loss_grad(const DepthMap& pred, const DepthMap& gt);

struct DepthHeadGradients {
  Eigen::VectorXd weight;
  double bias = 0.0;
  Eigen::MatrixXd cells;  // d/d F_spatial
};

DepthHeadGradients depth_head_backward(const FeatureGrid& spatial, const DepthHeadParams& params,
                                       const Eigen::VectorXd& d_depth);

// ---------------------------------------------------------------------------
// The whole local-feature mining block: split, depth head, fuse, attend.

struct SpatialMiningParams {
  CellLinearMap spatial_map;
  CellLinearMap rgb_map;
  DepthHeadParams depth;
  AttentionParams attention;
};

struct SpatialMiningOutput {
  DepthMap depth;
  TokenMatrix tokens;
};

SpatialMiningOutput mine_spatial_features(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                          const SpatialMiningParams& params);

struct SpatialMiningGradients {
  CellLinearMap spatial_map;
  CellLinearMap rgb_map;
  DepthHeadGradients depth;
  AttentionGradients attention;
};

/// Objective = depth_weight * depth_l1_loss(depth, depth_gt) + sum(tokens .* d_tokens).
double spatial_mining_objective(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                const SpatialMiningParams& params, const DepthMap& depth_gt,
                                const Eigen::MatrixXd& d_tokens, double depth_weight);

SpatialMiningGradients spatial_mining_backward(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                               const SpatialMiningParams& params, const DepthMap& depth_gt,
                                               const Eigen::MatrixXd& d_tokens, double depth_weight);

}  // namespace mono3d
