#include "mono3d/decoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "mono3d/error.hpp"

namespace mono3d {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

// Floored at the smallest normal double so the output stays strictly positive.
double softplus(double x) {
  if (x > 30.0) return x;
  return std::max(std::log1p(std::exp(x)), std::numeric_limits<double>::min());
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------
// Sequences

void TokenSequence::validate() const {
  const int n = size();
  if (embeddings.rows() != n) throw Error(ErrorKind::MalformedSequence, "embedding rows != number of kinds");
  if (n < 2) throw Error(ErrorKind::MalformedSequence, "sequence must end with <pos> and a query slot");
  if (!embeddings.allFinite()) throw Error(ErrorKind::MalformedSequence, "non-finite embedding");
  int pos = 0, slots = 0;
  for (TokenKind k : kinds) {
    pos += k == TokenKind::PosMarker;
    slots += k == TokenKind::QuerySlot;
  }
  if (pos != 1 || slots != 1) {
    throw Error(ErrorKind::MalformedSequence, "need exactly one <pos> marker and one query slot");
  }
  if (kinds[n - 2] != TokenKind::PosMarker || kinds[n - 1] != TokenKind::QuerySlot) {
    throw Error(ErrorKind::MalformedSequence, "<pos> marker and query slot must close the sequence, in that order");
  }
}

TokenSequence substitute_query(const TokenSequence& seq, const QueryEmbedding& query) {
  seq.validate();
  if (query.size() != seq.embeddings.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "query embedding width != d_model");
  }
  TokenSequence out = seq;
  out.embeddings.row(out.query_index()) = query.transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

HeadMlp zero_mlp(int in, int hidden, int out) {
  return {Eigen::MatrixXd::Zero(in, hidden), Eigen::RowVectorXd::Zero(hidden), Eigen::MatrixXd::Zero(hidden, out),
          Eigen::RowVectorXd::Zero(out)};
}

template <typename Self, typename Ref>
std::vector<Ref> collect_tensors(Self& p) {
  std::vector<Ref> out;
  auto add = [&](std::string name, auto& t) { out.push_back(Ref{std::move(name), t.data(), t.size()}); };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    add(pre + "W_Q", L.W_Q);
    add(pre + "W_K", L.W_K);
    add(pre + "W_V", L.W_V);
    add(pre + "W_O", L.W_O);
    add(pre + "W_1", L.W_1);
    add(pre + "b_1", L.b_1);
    add(pre + "W_2", L.W_2);
    add(pre + "b_2", L.b_2);
  }
  auto add_mlp = [&](const std::string& name, auto& m) {
    add(name + ".W_1", m.W_1);
    add(name + ".b_1", m.b_1);
    add(name + ".W_2", m.W_2);
    add(name + ".b_2", m.b_2);
  };
  add_mlp("head_uv", p.uv);
  add_mlp("head_lwh", p.lwh);
  add_mlp("head_depth", p.depth);
  add_mlp("head_rot6d", p.rot6d);
  add("query", p.query);
  return out;
}

}  // namespace

DecoderParams DecoderParams::zeros(const DecoderConfig& c) {
  if (c.d_model <= 0 || c.num_layers < 0 || c.ff_dim <= 0 || c.head_hidden <= 0) {
    throw Error(ErrorKind::ShapeMismatch, "decoder dimensions must be positive");
  }
  DecoderParams p;
  p.config = c;
  const int d = c.d_model;
  for (int l = 0; l < c.num_layers; ++l) {
    DecoderLayer L;
    L.W_Q = L.W_K = L.W_V = L.W_O = Eigen::MatrixXd::Zero(d, d);
    L.W_1 = Eigen::MatrixXd::Zero(d, c.ff_dim);
    L.b_1 = Eigen::RowVectorXd::Zero(c.ff_dim);
    L.W_2 = Eigen::MatrixXd::Zero(c.ff_dim, d);
    L.b_2 = Eigen::RowVectorXd::Zero(d);
    p.layers.push_back(std::move(L));
  }
  p.uv = zero_mlp(d, c.head_hidden, 2);
  p.lwh = zero_mlp(d, c.head_hidden, 3);
  p.depth = zero_mlp(d, c.head_hidden, 1);
  p.rot6d = zero_mlp(d, c.head_hidden, 6);
  p.query = Eigen::VectorXd::Zero(d);
  return p;
}

DecoderParams DecoderParams::random(const DecoderConfig& c, std::uint64_t seed, double gain) {
  DecoderParams p = zeros(c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](Eigen::MatrixXd& m) {
    const double s = gain / std::sqrt(static_cast<double>(m.rows()));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * normal(rng);
  };
  for (auto& L : p.layers) {
    fill(L.W_Q);
    fill(L.W_K);
    fill(L.W_V);
    fill(L.W_O);
    fill(L.W_1);
    fill(L.W_2);
  }
  for (HeadMlp* m : {&p.uv, &p.lwh, &p.depth, &p.rot6d}) {
    fill(m->W_1);
    fill(m->W_2);
  }
  for (Eigen::Index i = 0; i < p.query.size(); ++i) p.query[i] = normal(rng);
  return p;
}

std::vector<TensorRef> DecoderParams::tensors() { return collect_tensors<DecoderParams, TensorRef>(*this); }

std::vector<ConstTensorRef> DecoderParams::tensors() const {
  return collect_tensors<const DecoderParams, ConstTensorRef>(*this);
}

std::size_t DecoderParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.size);
  return n;
}

// ---------------------------------------------------------------------------
// Forward

namespace {

struct LayerCache {
  Eigen::MatrixXd X, Q, K, V, P, A, H, Z1, G;
};

Eigen::MatrixXd causal_softmax(const Eigen::MatrixXd& S) {
  const Eigen::Index n = S.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = S.row(i).head(i + 1).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j) {
      P(i, j) = std::exp(S(i, j) - m);
      sum += P(i, j);
    }
    P.row(i).head(i + 1) /= sum;
  }
  return P;
}

Eigen::MatrixXd apply_gelu(const Eigen::MatrixXd& z) { return z.unaryExpr([](double x) { return gelu(x); }); }

Eigen::MatrixXd run_layers(const Eigen::MatrixXd& input, const DecoderParams& params, std::vector<LayerCache>* caches) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.config.d_model));
  Eigen::MatrixXd X = input;
  for (const auto& L : params.layers) {
    LayerCache c;
    c.X = X;
    c.Q = X * L.W_Q;
    c.K = X * L.W_K;
    c.V = X * L.W_V;
    c.P = causal_softmax((c.Q * c.K.transpose()) * scale);
    c.A = c.P * c.V;
    c.H = X + c.A * L.W_O;
    c.Z1 = (c.H * L.W_1).rowwise() + L.b_1;
    c.G = apply_gelu(c.Z1);
    X = c.H + ((c.G * L.W_2).rowwise() + L.b_2);
    if (caches) caches->push_back(std::move(c));
  }
  return X;
}

void check_sequence(const TokenSequence& seq, const DecoderParams& params) {
  seq.validate();
  if (seq.embeddings.cols() != params.config.d_model) {
    throw Error(ErrorKind::ShapeMismatch, "embedding width != d_model");
  }
}

struct MlpCache {
  Eigen::RowVectorXd pre, hidden, out;
};

MlpCache run_mlp(const HeadMlp& m, const Eigen::RowVectorXd& x) {
  MlpCache c;
  c.pre = x * m.W_1 + m.b_1;
  c.hidden = c.pre.unaryExpr([](double v) { return gelu(v); });
  c.out = c.hidden * m.W_2 + m.b_2;
  return c;
}

// Accumulates parameter gradients into `g`, returns d/d input.
Eigen::RowVectorXd backprop_mlp(const HeadMlp& m, const Eigen::RowVectorXd& x, const MlpCache& c,
                                const Eigen::RowVectorXd& d_out, HeadMlp& g) {
  g.W_2 += c.hidden.transpose() * d_out;
  g.b_2 += d_out;
  const Eigen::RowVectorXd d_hidden = d_out * m.W_2.transpose();
  Eigen::RowVectorXd d_pre(d_hidden.size());
  for (Eigen::Index i = 0; i < d_pre.size(); ++i) d_pre[i] = d_hidden[i] * gelu_grad(c.pre[i]);
  g.W_1 += x.transpose() * d_pre;
  g.b_1 += d_pre;
  return d_pre * m.W_1.transpose();
}

struct HeadCaches {
  MlpCache uv, lwh, depth, rot6d;
};

RawHeadOutput assemble(const HeadCaches& c) {
  RawHeadOutput r;
  r.u_norm = sigmoid(c.uv.out[0]);
  r.v_norm = sigmoid(c.uv.out[1]);
  r.L = softplus(c.lwh.out[0]);
  r.W = softplus(c.lwh.out[1]);
  r.H = softplus(c.lwh.out[2]);
  r.d_v = softplus(c.depth.out[0]);
  r.rot6d = Rot6D{Vec3(c.rot6d.out[0], c.rot6d.out[1], c.rot6d.out[2]),
                  Vec3(c.rot6d.out[3], c.rot6d.out[4], c.rot6d.out[5])};
  return r;
}

HeadCaches run_heads(const Eigen::RowVectorXd& f, const DecoderParams& p) {
  return {run_mlp(p.uv, f), run_mlp(p.lwh, f), run_mlp(p.depth, f), run_mlp(p.rot6d, f)};
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Feature3D forward(const TokenSequence& seq, const DecoderParams& params) {
  check_sequence(seq, params);
  const Eigen::MatrixXd out = run_layers(seq.embeddings, params, nullptr);
  return out.row(seq.query_index()).transpose();
}

RawHeadOutput heads(const Feature3D& feature, const DecoderParams& params) {
  if (feature.size() != params.config.d_model) throw Error(ErrorKind::ShapeMismatch, "feature width != d_model");
  return assemble(run_heads(feature.transpose(), params));
}

RawHeadOutput predict(const TokenSequence& seq, const DecoderParams& params) {
  return heads(forward(substitute_query(seq, params.query), params), params);
}

double loss(const RawHeadOutput& raw, const RawHeadOutput& target) {
  const auto a = raw.to_array();
  const auto b = target.to_array();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Backward

DecoderGradients backward(const TokenSequence& seq, const DecoderParams& params, const RawHeadOutput& target) {
  const TokenSequence input = substitute_query(seq, params.query);
  check_sequence(input, params);
  const int q = input.query_index();
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.config.d_model));

  std::vector<LayerCache> caches;
  const Eigen::MatrixXd top = run_layers(input.embeddings, params, &caches);
  const Eigen::RowVectorXd f = top.row(q);
  const HeadCaches hc = run_heads(f, params);
  const RawHeadOutput raw = assemble(hc);

  DecoderGradients g;
  g.params = DecoderParams::zeros(params.config);
  g.loss = loss(raw, target);

  // d loss / d pre-activation head outputs.
  const auto pa = raw.to_array();
  const auto ta = target.to_array();
  Eigen::RowVectorXd d_uv(2), d_lwh(3), d_depth(1), d_rot(6);
  d_uv[0] = sign(pa[0] - ta[0]) * raw.u_norm * (1.0 - raw.u_norm);
  d_uv[1] = sign(pa[1] - ta[1]) * raw.v_norm * (1.0 - raw.v_norm);
  d_depth[0] = sign(pa[2] - ta[2]) * sigmoid(hc.depth.out[0]);
  for (int k = 0; k < 3; ++k) d_lwh[k] = sign(pa[3 + k] - ta[3 + k]) * sigmoid(hc.lwh.out[k]);
  for (int k = 0; k < 6; ++k) d_rot[k] = sign(pa[6 + k] - ta[6 + k]);

  Eigen::RowVectorXd d_f = backprop_mlp(params.uv, f, hc.uv, d_uv, g.params.uv);
  d_f += backprop_mlp(params.lwh, f, hc.lwh, d_lwh, g.params.lwh);
  d_f += backprop_mlp(params.depth, f, hc.depth, d_depth, g.params.depth);
  d_f += backprop_mlp(params.rot6d, f, hc.rot6d, d_rot, g.params.rot6d);

  Eigen::MatrixXd dX = Eigen::MatrixXd::Zero(top.rows(), top.cols());
  dX.row(q) = d_f;
  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const DecoderLayer& L = params.layers[l];
    const LayerCache& c = caches[l];
    DecoderLayer& gL = g.params.layers[l];

    // Feed-forward block: Y = H + gelu(H W_1 + b_1) W_2 + b_2.
    const Eigen::MatrixXd& dY = dX;
    gL.W_2 = c.G.transpose() * dY;
    gL.b_2 = dY.colwise().sum();
    const Eigen::MatrixXd dG = dY * L.W_2.transpose();
    const Eigen::MatrixXd dZ1 = dG.cwiseProduct(c.Z1.unaryExpr([](double v) { return gelu_grad(v); }));
    gL.W_1 = c.H.transpose() * dZ1;
    gL.b_1 = dZ1.colwise().sum();
    const Eigen::MatrixXd dH = dY + dZ1 * L.W_1.transpose();

    // Attention block: H = X + softmax(Q K^T * scale) V W_O.
    gL.W_O = c.A.transpose() * dH;
    const Eigen::MatrixXd dA = dH * L.W_O.transpose();
    const Eigen::MatrixXd dP = dA * c.V.transpose();
    const Eigen::MatrixXd dV = c.P.transpose() * dA;
    const Eigen::VectorXd row_dot = (dP.array() * c.P.array()).rowwise().sum();
    const Eigen::MatrixXd dS = (c.P.array() * (dP.colwise() - row_dot).array()).matrix() * scale;
    const Eigen::MatrixXd dQ = dS * c.K;
    const Eigen::MatrixXd dK = dS.transpose() * c.Q;
    gL.W_Q = c.X.transpose() * dQ;
    gL.W_K = c.X.transpose() * dK;
    gL.W_V = c.X.transpose() * dV;
    dX = dH + dQ * L.W_Q.transpose() + dK * L.W_K.transpose() + dV * L.W_V.transpose();
  }
  g.embeddings = dX;
  g.params.query = dX.row(q).transpose();
  return g;
}

// ---------------------------------------------------------------------------
// Training

double mean_loss(const std::vector<TrainSample>& dataset, const DecoderParams& params) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "no samples");
  double s = 0.0;
  for (const auto& sample : dataset) s += loss(predict(sample.sequence, params), sample.target);
  return s / static_cast<double>(dataset.size());
}

TrainResult train(const std::vector<TrainSample>& dataset, const DecoderConfig& model, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "training needs at least one sample");
  return train_from(dataset, DecoderParams::random(model, config.seed, config.init_gain), config);
}

TrainResult train_from(const std::vector<TrainSample>& dataset, DecoderParams init, const TrainConfig& config) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "training needs at least one sample");
  if (config.batch_size <= 0 || config.epochs < 0) {
    throw Error(ErrorKind::InvalidRanges, "batch size must be > 0 and epochs >= 0");
  }
  TrainResult result;
  result.params = std::move(init);
  result.initial_loss = mean_loss(dataset, result.params);

  auto tensors = result.params.tensors();
  std::vector<Eigen::VectorXd> m1, m2;
  for (const auto& t : tensors) {
    m1.push_back(Eigen::VectorXd::Zero(t.size));
    m2.push_back(Eigen::VectorXd::Zero(t.size));
  }

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> sample_loss(n, 0.0);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      DecoderParams grad_sum = DecoderParams::zeros(result.params.config);
      auto acc = grad_sum.tensors();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        const DecoderGradients g = backward(dataset[idx].sequence, result.params, dataset[idx].target);
        sample_loss[idx] = g.loss;
        const auto gt = g.params.tensors();
        for (std::size_t t = 0; t < acc.size(); ++t) {
          Eigen::Map<Eigen::VectorXd>(acc[t].data, acc[t].size) += Eigen::Map<const Eigen::VectorXd>(gt[t].data, gt[t].size);
        }
      }
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for (std::size_t t = 0; t < tensors.size(); ++t) {
        Eigen::Map<Eigen::VectorXd> w(tensors[t].data, tensors[t].size);
        const Eigen::VectorXd grad = Eigen::Map<const Eigen::VectorXd>(acc[t].data, acc[t].size) * inv_batch;
        m1[t] = config.beta1 * m1[t] + (1.0 - config.beta1) * grad;
        m2[t] = config.beta2 * m2[t] + (1.0 - config.beta2) * grad.cwiseAbs2();
        w.array() -= config.learning_rate * (m1[t].array() / bc1) / ((m2[t].array() / bc2).sqrt() + config.epsilon);
      }
    }
    double total = 0.0;
    for (double l : sample_loss) total += l;
    result.loss_history.push_back(total / static_cast<double>(n));
  }
  return result;
}

}  // namespace mono3d
