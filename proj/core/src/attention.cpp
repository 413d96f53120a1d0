#include "mono3d/attention.hpp"

#include <cmath>
#include <string>

#include "mono3d/decoder.hpp"
#include "mono3d/error.hpp"

namespace mono3d {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ShapeMismatch, what);
}

void check_map(const CellLinearMap& map, int channels, const char* name) {
  require(map.weight.rows() == channels, std::string(name) + ": weight rows != grid channels");
  require(map.bias.size() == map.weight.cols(), std::string(name) + ": bias size != output channels");
}

void check_attention(const TokenMatrix& tokens, const FeatureGrid& grid, const AttentionParams& p) {
  require(p.W_Q.cols() == p.W_K.cols() && p.W_K.cols() == p.W_V.cols(), "W_Q, W_K, W_V must share d_k");
  require(p.W_Q.cols() > 0, "d_k must be > 0");
  require(tokens.cols() == p.W_Q.rows(), "token channels != W_Q rows");
  require(grid.channels() == p.W_K.rows() && grid.channels() == p.W_V.rows(), "grid channels != W_K/W_V rows");
  require(grid.num_cells() > 0 && grid.cells.rows() == grid.num_cells(), "grid has no cells");
}

}  // namespace

CellLinearMap CellLinearMap::identity(int channels) {
  return {Eigen::MatrixXd::Identity(channels, channels), Eigen::RowVectorXd::Zero(channels)};
}

FeatureGrid CellLinearMap::apply(const FeatureGrid& grid) const {
  check_map(*this, grid.channels(), "cell map");
  FeatureGrid out;
  out.height = grid.height;
  out.width = grid.width;
  out.cells = (grid.cells * weight).rowwise() + bias;
  return out;
}

std::pair<FeatureGrid, FeatureGrid> branch_split(const FeatureGrid& local, const CellLinearMap& spatial_map,
                                                 const CellLinearMap& rgb_map) {
  check_map(spatial_map, local.channels(), "spatial map");
  check_map(rgb_map, local.channels(), "rgb map");
  return {spatial_map.apply(local), rgb_map.apply(local)};
}

DepthMap depth_head(const FeatureGrid& spatial, const DepthHeadParams& params) {
  require(params.weight.size() == spatial.channels(), "depth head weight size != grid channels");
  DepthMap out(spatial.height, spatial.width);
  const Eigen::VectorXd z = (spatial.cells * params.weight).array() + params.bias;
  for (Eigen::Index i = 0; i < z.size(); ++i) out.values[i] = softplus(z[i]);
  return out;
}

namespace {

void check_depth_pair(const DepthMap& pred, const DepthMap& gt) {
  require(pred.height == gt.height && pred.width == gt.width, "depth map sizes differ");
  require(pred.values.size() == gt.values.size() && static_cast<Eigen::Index>(gt.valid.size()) == gt.values.size() &&
              pred.valid.size() == gt.valid.size(),
          "depth map storage inconsistent");
}

}  // namespace

double depth_l1_loss(const DepthMap& pred, const DepthMap& gt) {
  check_depth_pair(pred, gt);
  double sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < gt.values.size(); ++i) {
    if (!gt.valid[i] || !pred.valid[i]) continue;
    sum += std::abs(pred.values[i] - gt.values[i]);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyValidMask, "no valid depth cells");
  return sum / static_cast<double>(n);
}

Eigen::VectorXd depth_l1_loss_grad(const DepthMap& pred, const DepthMap& gt) {
  check_depth_pair(pred, gt);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(pred.values.size());
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < gt.values.size(); ++i) {
    if (!gt.valid[i] || !pred.valid[i]) continue;
    const double diff = pred.values[i] - gt.values[i];
    g[i] = (diff > 0.0) - (diff < 0.0);
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyValidMask, "no valid depth cells");
  return g / static_cast<double>(n);
}

DepthHeadGradients depth_head_backward(const FeatureGrid& spatial, const DepthHeadParams& params,
                                       const Eigen::VectorXd& d_depth) {
  require(d_depth.size() == spatial.num_cells(), "depth gradient size != cells");
  const Eigen::VectorXd z = (spatial.cells * params.weight).array() + params.bias;
  Eigen::VectorXd dz(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) dz[i] = d_depth[i] * sigmoid(z[i]);
  DepthHeadGradients g;
  g.weight = spatial.cells.transpose() * dz;
  g.bias = dz.sum();
  g.cells = dz * params.weight.transpose();
  return g;
}

FeatureGrid add_fuse(const FeatureGrid& spatial, const FeatureGrid& rgb) {
  require(spatial.height == rgb.height && spatial.width == rgb.width && spatial.channels() == rgb.channels(),
          "branch shapes differ");
  FeatureGrid out;
  out.height = spatial.height;
  out.width = spatial.width;
  out.cells = spatial.cells + rgb.cells;
  return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

TokenMatrix cross_branch_attention(const TokenMatrix& tokens, const FeatureGrid& spatial_local,
                                   const AttentionParams& params) {
  check_attention(tokens, spatial_local, params);
  const Eigen::MatrixXd Q = tokens * params.W_Q;
  const Eigen::MatrixXd K = spatial_local.cells * params.W_K;
  const Eigen::MatrixXd V = spatial_local.cells * params.W_V;
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.d_k()));
  return softmax_rows((Q * K.transpose()) * scale) * V;
}

AttentionGradients cross_branch_attention_backward(const TokenMatrix& tokens, const FeatureGrid& spatial_local,
                                                   const AttentionParams& params, const Eigen::MatrixXd& d_out) {
  check_attention(tokens, spatial_local, params);
  require(d_out.rows() == tokens.rows() && d_out.cols() == params.d_k(), "upstream gradient shape");
  const Eigen::MatrixXd& C = spatial_local.cells;
  const Eigen::MatrixXd Q = tokens * params.W_Q;
  const Eigen::MatrixXd K = C * params.W_K;
  const Eigen::MatrixXd V = C * params.W_V;
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.d_k()));
  const Eigen::MatrixXd P = softmax_rows((Q * K.transpose()) * scale);

  const Eigen::MatrixXd dP = d_out * V.transpose();
  const Eigen::MatrixXd dV = P.transpose() * d_out;
  const Eigen::VectorXd row_dot = (dP.array() * P.array()).rowwise().sum();
  const Eigen::MatrixXd dS = (P.array() * (dP.colwise() - row_dot).array()).matrix() * scale;
  const Eigen::MatrixXd dQ = dS * K;
  const Eigen::MatrixXd dK = dS.transpose() * Q;

  AttentionGradients g;
  g.W_Q = tokens.transpose() * dQ;
  g.W_K = C.transpose() * dK;
  g.W_V = C.transpose() * dV;
  g.tokens = dQ * params.W_Q.transpose();
  g.cells = dK * params.W_K.transpose() + dV * params.W_V.transpose();
  return g;
}

SpatialMiningOutput mine_spatial_features(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                          const SpatialMiningParams& params) {
  const auto [spatial, rgb] = branch_split(local, params.spatial_map, params.rgb_map);
  SpatialMiningOutput out;
  out.depth = depth_head(spatial, params.depth);
  out.tokens = cross_branch_attention(vit_tokens, add_fuse(spatial, rgb), params.attention);
  return out;
}

double spatial_mining_objective(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                const SpatialMiningParams& params, const DepthMap& depth_gt,
                                const Eigen::MatrixXd& d_tokens, double depth_weight) {
  const SpatialMiningOutput out = mine_spatial_features(local, vit_tokens, params);
  return depth_weight * depth_l1_loss(out.depth, depth_gt) + (out.tokens.array() * d_tokens.array()).sum();
}

SpatialMiningGradients spatial_mining_backward(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                               const SpatialMiningParams& params, const DepthMap& depth_gt,
                                               const Eigen::MatrixXd& d_tokens, double depth_weight) {
  const auto [spatial, rgb] = branch_split(local, params.spatial_map, params.rgb_map);
  const DepthMap depth = depth_head(spatial, params.depth);
  const FeatureGrid fused = add_fuse(spatial, rgb);

  SpatialMiningGradients g;
  g.attention = cross_branch_attention_backward(vit_tokens, fused, params.attention, d_tokens);
  g.depth = depth_head_backward(spatial, params.depth, depth_weight * depth_l1_loss_grad(depth, depth_gt));

  const Eigen::MatrixXd d_spatial = g.attention.cells + g.depth.cells;
  const Eigen::MatrixXd& d_rgb = g.attention.cells;
  g.spatial_map = {local.cells.transpose() * d_spatial, d_spatial.colwise().sum()};
  g.rgb_map = {local.cells.transpose() * d_rgb, d_rgb.colwise().sum()};
  return g;
}

}  // namespace mono3d
