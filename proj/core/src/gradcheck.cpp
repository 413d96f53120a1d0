#include "mono3d/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace mono3d {

namespace {

GradGroupError compare(std::string name, const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  GradGroupError e;
  e.name = std::move(name);
  e.size = static_cast<std::size_t>(analytic.size());
  if (analytic.size() == 0) return e;
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  const double scale = std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-10});
  e.max_rel_error = diff / scale;
  return e;
}

// Perturbs data[0..size) in place, one coordinate at a time.
Eigen::VectorXd numeric_gradient(double* data, Eigen::Index size, double step, const std::function<double()>& f) {
  Eigen::VectorXd g(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const double orig = data[i];
    data[i] = orig + step;
    const double up = f();
    data[i] = orig - step;
    const double down = f();
    data[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

Eigen::VectorXd flat(const double* data, Eigen::Index size) { return Eigen::Map<const Eigen::VectorXd>(data, size); }

template <typename M>
Eigen::VectorXd flat(const M& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

}  // namespace

double worst_error(const std::vector<GradGroupError>& groups) {
  double w = 0.0;
  for (const auto& g : groups) w = std::max(w, g.max_rel_error);
  return w;
}

std::vector<GradGroupError> decoder_gradcheck(const TokenSequence& seq, const DecoderParams& params,
                                              const RawHeadOutput& target, double step) {
  const DecoderGradients analytic = backward(seq, params, target);
  DecoderParams probe = params;
  auto f = [&] { return loss(predict(seq, probe), target); };
  std::vector<GradGroupError> out;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.params.tensors();
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    const Eigen::VectorXd numeric = numeric_gradient(probe_tensors[t].data, probe_tensors[t].size, step, f);
    out.push_back(compare(probe_tensors[t].name, flat(grad_tensors[t].data, grad_tensors[t].size), numeric));
  }
  return out;
}

std::vector<GradGroupError> spatial_mining_gradcheck(const FeatureGrid& local, const TokenMatrix& vit_tokens,
                                                     const SpatialMiningParams& params, const DepthMap& depth_gt,
                                                     const Eigen::MatrixXd& d_tokens, double depth_weight,
                                                     double step) {
  const SpatialMiningGradients g = spatial_mining_backward(local, vit_tokens, params, depth_gt, d_tokens, depth_weight);
  SpatialMiningParams p = params;
  TokenMatrix tokens = vit_tokens;
  auto f = [&] { return spatial_mining_objective(local, tokens, p, depth_gt, d_tokens, depth_weight); };
  auto check = [&](const std::string& name, auto& tensor, const auto& grad) {
    return compare(name, flat(grad), numeric_gradient(tensor.data(), tensor.size(), step, f));
  };
  std::vector<GradGroupError> out;
  out.push_back(check("spatial_map.weight", p.spatial_map.weight, g.spatial_map.weight));
  out.push_back(check("spatial_map.bias", p.spatial_map.bias, g.spatial_map.bias));
  out.push_back(check("rgb_map.weight", p.rgb_map.weight, g.rgb_map.weight));
  out.push_back(check("rgb_map.bias", p.rgb_map.bias, g.rgb_map.bias));
  out.push_back(check("depth.weight", p.depth.weight, g.depth.weight));
  {
    Eigen::Matrix<double, 1, 1> bias_grad;
    bias_grad << g.depth.bias;
    out.push_back(compare("depth.bias", bias_grad, numeric_gradient(&p.depth.bias, 1, step, f)));
  }
  out.push_back(check("attention.W_Q", p.attention.W_Q, g.attention.W_Q));
  out.push_back(check("attention.W_K", p.attention.W_K, g.attention.W_K));
  out.push_back(check("attention.W_V", p.attention.W_V, g.attention.W_V));
  out.push_back(check("vit_tokens", tokens, g.attention.tokens));
  return out;
}

DecoderInstance random_decoder_instance(std::uint64_t seed, int seq_len, const DecoderConfig& config) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  DecoderInstance inst;
  inst.params = DecoderParams::random(config, rng());
  // Non-zero biases so their gradients are exercised away from the origin.
  for (auto& t : inst.params.tensors()) {
    if (t.name.find(".b_") != std::string::npos) {
      for (Eigen::Index i = 0; i < t.size; ++i) t.data[i] = 0.1 * normal(rng);
    }
  }
  inst.sequence.embeddings = Eigen::MatrixXd(seq_len, config.d_model);
  for (Eigen::Index i = 0; i < inst.sequence.embeddings.size(); ++i) inst.sequence.embeddings.data()[i] = normal(rng);
  for (int k = 0; k < seq_len - 2; ++k) inst.sequence.kinds.push_back(k % 2 ? TokenKind::Image : TokenKind::Caption);
  inst.sequence.kinds.push_back(TokenKind::PosMarker);
  inst.sequence.kinds.push_back(TokenKind::QuerySlot);
  std::array<double, RawHeadOutput::kNumComponents> t{};
  t[0] = unit(rng);
  t[1] = unit(rng);
  for (int k = 2; k < 6; ++k) t[k] = 0.2 + 2.0 * unit(rng);
  for (int k = 6; k < 12; ++k) t[k] = normal(rng);
  inst.target = RawHeadOutput::from_array(t);
  return inst;
}

MiningInstance random_mining_instance(std::uint64_t seed, int height, int width, int channels, int num_tokens,
                                      int d_k) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](auto& m, double s) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * normal(rng);
  };
  MiningInstance inst;
  inst.local = FeatureGrid(height, width, channels);
  fill(inst.local.cells, 1.0);
  inst.vit_tokens.resize(num_tokens, channels);
  fill(inst.vit_tokens, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(channels));
  for (CellLinearMap* m : {&inst.params.spatial_map, &inst.params.rgb_map}) {
    m->weight.resize(channels, channels);
    m->bias.resize(channels);
    fill(m->weight, s);
    fill(m->bias, 0.1);
  }
  inst.params.depth.weight.resize(channels);
  fill(inst.params.depth.weight, s);
  inst.params.depth.bias = 0.5;
  for (Eigen::MatrixXd* w : {&inst.params.attention.W_Q, &inst.params.attention.W_K, &inst.params.attention.W_V}) {
    w->resize(channels, d_k);
    fill(*w, s);
  }
  inst.depth_gt = DepthMap(height, width);
  std::uniform_real_distribution<double> depth(0.5, 5.0);
  std::bernoulli_distribution keep(0.7);
  for (int i = 0; i < height * width; ++i) {
    inst.depth_gt.values[i] = depth(rng);
    inst.depth_gt.valid[i] = keep(rng);
  }
  inst.depth_gt.valid[0] = true;
  inst.d_tokens.resize(num_tokens, d_k);
  fill(inst.d_tokens, 1.0);
  return inst;
}

}  // namespace mono3d
