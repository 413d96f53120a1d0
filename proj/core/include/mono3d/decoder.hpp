#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mono3d/head_output.hpp"

namespace mono3d {

enum class TokenKind { Caption, Image, PosMarker, QuerySlot };

/// Decoder input. The sequence must end with exactly one <pos> marker
/// followed by exactly one 3D-query slot.
struct TokenSequence {
  Eigen::MatrixXd embeddings;  // (seq_len, d_model)
  std::vector<TokenKind> kinds;

  int size() const { return static_cast<int>(kinds.size()); }
  int query_index() const { return size() - 1; }

  /// Throws MalformedSequence.
  void validate() const;
};

using QueryEmbedding = Eigen::VectorXd;
using Feature3D = Eigen::VectorXd;

struct DecoderConfig {
  int d_model = 32;
  int num_layers = 2;
  int ff_dim = 64;
  int head_hidden = 32;
};

/// Causal single-head self-attention followed by a GELU feed-forward, both residual.
struct DecoderLayer {
  Eigen::MatrixXd W_Q, W_K, W_V, W_O;  // (d_model, d_model)
  Eigen::MatrixXd W_1;                 // (d_model, ff_dim)
  Eigen::RowVectorXd b_1;
  Eigen::MatrixXd W_2;                 // (ff_dim, d_model)
  Eigen::RowVectorXd b_2;
};

/// Two-layer regression head: out = gelu(x W_1 + b_1) W_2 + b_2.
struct HeadMlp {
  Eigen::MatrixXd W_1;
  Eigen::RowVectorXd b_1;
  Eigen::MatrixXd W_2;
  Eigen::RowVectorXd b_2;
};

/// Named view of one parameter tensor, used by the optimizer, the
/// checkpoint writer and gradient checks.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index size;
};

struct ConstTensorRef {
  std::string name;
  const double* data;
  Eigen::Index size;
};

struct DecoderParams {
  DecoderConfig config;
  std::vector<DecoderLayer> layers;
  HeadMlp uv;     // -> sigmoid -> (u_norm, v_norm)
  HeadMlp lwh;    // -> softplus -> (L, W, H)
  HeadMlp depth;  // -> softplus -> d_v
  HeadMlp rot6d;  // unconstrained
  QueryEmbedding query;

  /// All-zero parameters of the right shapes.
  static DecoderParams zeros(const DecoderConfig& config);
  /// Gaussian init with std 1/sqrt(fan_in) (scaled by `gain`), zero biases.
  static DecoderParams random(const DecoderConfig& config, std::uint64_t seed, double gain = 1.0);

  /// Fixed traversal order; identical for any two params with equal config.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
  std::size_t num_parameters() const;
};

TokenSequence substitute_query(const TokenSequence& seq, const QueryEmbedding& query);

/// Runs all layers and returns the final hidden state at the query slot.
/// Expects the query already substituted.
Feature3D forward(const TokenSequence& seq, const DecoderParams& params);

RawHeadOutput heads(const Feature3D& feature, const DecoderParams& params);

/// substitute_query + forward + heads.
RawHeadOutput predict(const TokenSequence& seq, const DecoderParams& params);

/// Unit-weight L1 over all twelve head components.
double loss(const RawHeadOutput& raw, const RawHeadOutput& target);

struct DecoderGradients {
  DecoderParams params;         // same shapes as the model; query holds d/d query
  Eigen::MatrixXd embeddings;   // d/d input embeddings after substitution
  double loss = 0.0;
};

/// Gradients of loss(predict(seq, params), target) for every parameter.
DecoderGradients backward(const TokenSequence& seq, const DecoderParams& params, const RawHeadOutput& target);

struct TrainSample {
  TokenSequence sequence;
  RawHeadOutput target;
};

struct TrainConfig {
  int epochs = 500;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  double init_gain = 1.0;
};

struct TrainResult {
  DecoderParams params;
  double initial_loss = 0.0;         // dataset mean before any update
  std::vector<double> loss_history;  // per-epoch mean of the per-sample losses seen that epoch
};

/// Minibatch Adam. Deterministic for a fixed seed: the seed drives both
/// initialization and the per-epoch shuffle.
TrainResult train(const std::vector<TrainSample>& dataset, const DecoderConfig& model, const TrainConfig& config);

/// Same, starting from given parameters.
TrainResult train_from(const std::vector<TrainSample>& dataset, DecoderParams init, const TrainConfig& config);

double mean_loss(const std::vector<TrainSample>& dataset, const DecoderParams& params);

double gelu(double x);
double gelu_grad(double x);
double softplus(double x);
double sigmoid(double x);

}  // namespace mono3d
