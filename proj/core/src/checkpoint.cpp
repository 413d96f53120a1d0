#include "mono3d/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json_detail.hpp"
#include "mono3d/error.hpp"
#include "mono3d/json_io.hpp"

namespace mono3d {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename Derived>
ordered_json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Derived>
ordered_json vector_json(const Eigen::MatrixBase<Derived>& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void read_matrix(const json& j, Eigen::MatrixXd& m, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    throw Error(ErrorKind::SchemaError, "tensor '" + name + "' has the wrong number of rows");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw Error(ErrorKind::SchemaError, "tensor '" + name + "' has the wrong number of columns");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!row[c].is_number()) throw Error(ErrorKind::SchemaError, "tensor '" + name + "' holds a non-number");
      m(r, c) = row[c].get<double>();
    }
  }
}

template <typename Vector>
void read_vector(const json& j, Vector& v, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size()) {
    throw Error(ErrorKind::SchemaError, "tensor '" + name + "' has the wrong length");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::SchemaError, "tensor '" + name + "' holds a non-number");
    v[i] = j[i].get<double>();
  }
}

void mlp_json(ordered_json& out, const std::string& name, const HeadMlp& m) {
  out[name + ".W_1"] = matrix_json(m.W_1);
  out[name + ".b_1"] = vector_json(m.b_1);
  out[name + ".W_2"] = matrix_json(m.W_2);
  out[name + ".b_2"] = vector_json(m.b_2);
}

void read_mlp(const json& j, const std::string& name, HeadMlp& m) {
  read_matrix(detail::field(j, (name + ".W_1").c_str(), "params"), m.W_1, name + ".W_1");
  read_vector(detail::field(j, (name + ".b_1").c_str(), "params"), m.b_1, name + ".b_1");
  read_matrix(detail::field(j, (name + ".W_2").c_str(), "params"), m.W_2, name + ".W_2");
  read_vector(detail::field(j, (name + ".b_2").c_str(), "params"), m.b_2, name + ".b_2");
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const DecoderParams& p = ckpt.params;
  ordered_json j;
  j["seed"] = ckpt.train.seed;
  j["config"] = {{"d_model", p.config.d_model},
                 {"num_layers", p.config.num_layers},
                 {"ff_dim", p.config.ff_dim},
                 {"head_hidden", p.config.head_hidden}};
  ordered_json train;
  train["epochs"] = ckpt.train.epochs;
  train["batch_size"] = ckpt.train.batch_size;
  train["learning_rate"] = ckpt.train.learning_rate;
  train["beta1"] = ckpt.train.beta1;
  train["beta2"] = ckpt.train.beta2;
  train["epsilon"] = ckpt.train.epsilon;
  train["init_gain"] = ckpt.train.init_gain;
  j["train"] = std::move(train);
  ordered_json enc;
  enc["d_model"] = ckpt.encoding.d_model;
  enc["num_caption_tokens"] = ckpt.encoding.num_caption_tokens;
  enc["num_image_tokens"] = ckpt.encoding.num_image_tokens;
  enc["noise_sigma"] = ckpt.encoding.noise_sigma;
  enc["seed"] = ckpt.encoding.seed;
  j["encoding"] = std::move(enc);

  ordered_json params;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& L = p.layers[l];
    const std::string pre = fmt::format("layer{}.", l);
    params[pre + "W_Q"] = matrix_json(L.W_Q);
    params[pre + "W_K"] = matrix_json(L.W_K);
    params[pre + "W_V"] = matrix_json(L.W_V);
    params[pre + "W_O"] = matrix_json(L.W_O);
    params[pre + "W_1"] = matrix_json(L.W_1);
    params[pre + "b_1"] = vector_json(L.b_1);
    params[pre + "W_2"] = matrix_json(L.W_2);
    params[pre + "b_2"] = vector_json(L.b_2);
  }
  mlp_json(params, "head_uv", p.uv);
  mlp_json(params, "head_lwh", p.lwh);
  mlp_json(params, "head_depth", p.depth);
  mlp_json(params, "head_rot6d", p.rot6d);
  params["query"] = vector_json(p.query);
  j["params"] = std::move(params);
  ordered_json hist = ordered_json::array();
  for (double v : ckpt.loss_history) hist.push_back(v);
  j["loss_history"] = std::move(hist);
  return detail::dump_compact(j);
}

Checkpoint checkpoint_from_json(std::string_view text) {
  const json j = detail::parse_line(text);
  Checkpoint ckpt;
  const json& cfg = detail::field(j, "config", "");
  DecoderConfig config;
  config.d_model = static_cast<int>(detail::number(cfg, "d_model", "config"));
  config.num_layers = static_cast<int>(detail::number(cfg, "num_layers", "config"));
  config.ff_dim = static_cast<int>(detail::number(cfg, "ff_dim", "config"));
  config.head_hidden = static_cast<int>(detail::number(cfg, "head_hidden", "config"));
  ckpt.params = DecoderParams::zeros(config);

  const json& train = detail::field(j, "train", "");
  ckpt.train.epochs = static_cast<int>(detail::number(train, "epochs", "train"));
  ckpt.train.batch_size = static_cast<int>(detail::number(train, "batch_size", "train"));
  ckpt.train.learning_rate = detail::number(train, "learning_rate", "train");
  ckpt.train.beta1 = detail::number(train, "beta1", "train");
  ckpt.train.beta2 = detail::number(train, "beta2", "train");
  ckpt.train.epsilon = detail::number(train, "epsilon", "train");
  ckpt.train.init_gain = detail::number(train, "init_gain", "train");
  const json& seed = detail::field(j, "seed", "");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw Error(ErrorKind::SchemaError, "field 'seed' must be an integer");
  }
  ckpt.train.seed = seed.get<std::uint64_t>();

  const json& enc = detail::field(j, "encoding", "");
  ckpt.encoding.d_model = static_cast<int>(detail::number(enc, "d_model", "encoding"));
  ckpt.encoding.num_caption_tokens = static_cast<int>(detail::number(enc, "num_caption_tokens", "encoding"));
  ckpt.encoding.num_image_tokens = static_cast<int>(detail::number(enc, "num_image_tokens", "encoding"));
  ckpt.encoding.noise_sigma = detail::number(enc, "noise_sigma", "encoding");
  ckpt.encoding.seed = detail::field(enc, "seed", "encoding").get<std::uint64_t>();

  const json& params = detail::field(j, "params", "");
  DecoderParams& p = ckpt.params;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = fmt::format("layer{}.", l);
    auto get = [&](const char* name) -> const json& { return detail::field(params, (pre + name).c_str(), "params"); };
    read_matrix(get("W_Q"), L.W_Q, pre + "W_Q");
    read_matrix(get("W_K"), L.W_K, pre + "W_K");
    read_matrix(get("W_V"), L.W_V, pre + "W_V");
    read_matrix(get("W_O"), L.W_O, pre + "W_O");
    read_matrix(get("W_1"), L.W_1, pre + "W_1");
    read_vector(get("b_1"), L.b_1, pre + "b_1");
    read_matrix(get("W_2"), L.W_2, pre + "W_2");
    read_vector(get("b_2"), L.b_2, pre + "b_2");
  }
  read_mlp(params, "head_uv", p.uv);
  read_mlp(params, "head_lwh", p.lwh);
  read_mlp(params, "head_depth", p.depth);
  read_mlp(params, "head_rot6d", p.rot6d);
  read_vector(detail::field(params, "query", "params"), p.query, "query");

  if (j.contains("loss_history")) {
    for (const auto& v : j["loss_history"]) ckpt.loss_history.push_back(v.get<double>());
  }
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_file(path, checkpoint_to_json(ckpt) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

std::string loss_history_csv(const std::vector<double>& history) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += fmt::format("{},{}\n", i + 1, format_number(history[i]));
  return out;
}

}  // namespace mono3d
