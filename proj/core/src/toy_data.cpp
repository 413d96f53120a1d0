#include "mono3d/toy_data.hpp"

#include <cmath>

#include "mono3d/error.hpp"

namespace mono3d {

namespace {

// Affine standardization of the twelve head targets before the random linear
// encoding, so every component enters the tokens at a comparable scale.
constexpr std::array<double, RawHeadOutput::kNumComponents> kMean = {0.5, 0.5, 4.0, 1.2, 1.2, 1.2, 0, 0, 0, 0, 0, 0};
constexpr std::array<double, RawHeadOutput::kNumComponents> kScale = {0.3, 0.3, 4.0, 0.6, 0.6, 0.6, 1, 1, 1, 1, 1, 1};

}  // namespace

ToyEncoder::ToyEncoder(const ToyEncodingConfig& config) : config_(config) {
  if (config.d_model <= 0 || config.num_caption_tokens < 0 || config.num_image_tokens < 1 ||
      !(config.noise_sigma >= 0.0)) {
    throw Error(ErrorKind::InvalidRanges, "toy encoding needs d_model > 0, >= 1 image token and sigma >= 0");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = 1.0 / std::sqrt(static_cast<double>(RawHeadOutput::kNumComponents));
  for (int k = 0; k < config.num_image_tokens; ++k) {
    Eigen::MatrixXd m(config.d_model, RawHeadOutput::kNumComponents);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * normal(rng);
    image_maps_.push_back(std::move(m));
  }
  caption_tokens_.resize(config.num_caption_tokens, config.d_model);
  for (Eigen::Index i = 0; i < caption_tokens_.size(); ++i) caption_tokens_.data()[i] = normal(rng);
  pos_marker_.resize(config.d_model);
  for (Eigen::Index i = 0; i < pos_marker_.size(); ++i) pos_marker_[i] = normal(rng);
}

TokenSequence ToyEncoder::encode(const RawHeadOutput& target, std::mt19937_64* noise) const {
  if (config_.noise_sigma > 0.0 && noise == nullptr) {
    throw Error(ErrorKind::InvalidRanges, "noisy encoding needs a random generator");
  }
  const auto values = target.to_array();
  Eigen::VectorXd feature(RawHeadOutput::kNumComponents);
  for (int i = 0; i < RawHeadOutput::kNumComponents; ++i) feature[i] = (values[i] - kMean[i]) / kScale[i];

  const int n = config_.num_caption_tokens + config_.num_image_tokens + 2;
  TokenSequence seq;
  seq.embeddings = Eigen::MatrixXd::Zero(n, config_.d_model);
  int row = 0;
  for (int k = 0; k < config_.num_caption_tokens; ++k, ++row) {
    seq.embeddings.row(row) = caption_tokens_.row(k);
    seq.kinds.push_back(TokenKind::Caption);
  }
  std::normal_distribution<double> normal(0.0, config_.noise_sigma);
  for (int k = 0; k < config_.num_image_tokens; ++k, ++row) {
    seq.embeddings.row(row) = (image_maps_[k] * feature).transpose();
    if (config_.noise_sigma > 0.0) {
      for (int c = 0; c < config_.d_model; ++c) seq.embeddings(row, c) += normal(*noise);
    }
    seq.kinds.push_back(TokenKind::Image);
  }
  seq.embeddings.row(row++) = pos_marker_;
  seq.kinds.push_back(TokenKind::PosMarker);
  seq.kinds.push_back(TokenKind::QuerySlot);
  return seq;
}

std::vector<ToySample> build_toy_dataset(const std::vector<SceneRecord>& scenes, const DatasetProfile& profile,
                                         const ToyEncoder& encoder, std::uint64_t noise_seed) {
  std::mt19937_64 rng(noise_seed);
  std::vector<ToySample> out;
  for (const auto& s : scenes) {
    for (const auto& o : s.objects) {
      ToySample t;
      t.image_id = s.image_id;
      t.object_id = o.object_id;
      t.sample.target = raw_from_box(o.box3d, s.intrinsics, profile);
      t.sample.sequence = encoder.encode(t.sample.target, &rng);
      out.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<TrainSample> train_samples(const std::vector<ToySample>& samples) {
  std::vector<TrainSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.sample);
  return out;
}

std::vector<PredictionRecord> predict_toy(const std::vector<ToySample>& samples, const DecoderParams& params) {
  std::vector<PredictionRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({s.image_id, s.object_id, RawPayload{predict(s.sample.sequence, params), std::nullopt}});
  }
  return out;
}

}  // namespace mono3d
