#include "mono3d_cli/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "mono3d/camera.hpp"
#include "mono3d/checkpoint.hpp"
#include "mono3d/error.hpp"
#include "mono3d/gradcheck.hpp"
#include "mono3d/json_io.hpp"
#include "mono3d/scene.hpp"
#include "mono3d/toy_data.hpp"

namespace mono3d::cli {

namespace {

constexpr double kGradcheckTolerance = 1e-5;

const std::map<std::string, SceneKind> kProfiles{{"indoor", SceneKind::Indoor}, {"outdoor", SceneKind::Outdoor}};
const std::map<std::string, PredictionMode> kModes{{"raw", PredictionMode::Raw}, {"box", PredictionMode::Box}};
const std::map<std::string, DepthErrorKind> kDepthErrors{{"z", DepthErrorKind::AxisZ},
                                                         {"euclidean", DepthErrorKind::Euclidean}};
const std::map<std::string, DepthMode> kDepthModes{{"virtual", DepthMode::VirtualOnly},
                                                   {"fused", DepthMode::FusedAverage}};
const std::map<std::string, RotationFrame> kFrames{{"allocentric", RotationFrame::Allocentric},
                                                   {"egocentric", RotationFrame::Egocentric}};

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw Error(ErrorKind::SchemaError, origin + ": invalid seed '" + text + "'");
  }
  return v;
}

// Flag wins; otherwise the environment; otherwise 0.
std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
  if (flag) return parse_seed(*flag, "--seed");
  if (const char* env = std::getenv(kSeedEnv)) return parse_seed(env, kSeedEnv);
  return 0;
}

Point3D parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double x = 0.0;
    const auto* end = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(item.data(), end, x);
    if (item.empty() || ec != std::errc{} || ptr != end || !std::isfinite(x)) {
      throw Error(ErrorKind::SchemaError, "--point: invalid coordinate '" + item + "'");
    }
    v.push_back(x);
  }
  if (v.size() != 3) throw Error(ErrorKind::SchemaError, "--point: expected X,Y,Z");
  return {v[0], v[1], v[2]};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SynthArgs {
  int scenes = 0;
  std::optional<std::string> seed;
  std::string profile = "indoor";
  std::string out;
  std::string perfect_pred;
  std::string pred_mode = "raw";
  bool no_focal_pairs = false;
};

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::string mode;
  std::string profile = "indoor";
  std::string report;
  std::string depth_error = "z";
  std::string depth_mode;
  std::string rotation_frame;
};

struct ProjectArgs {
  std::string intrinsics;
  std::string point;
};

struct TrainArgs {
  std::string data;
  int epochs = 500;
  std::optional<std::string> seed;
  std::string out;
  std::string profile = "indoor";
  std::string loss_csv;
  std::string pred_out;
  double lr = 1e-3;
  int batch_size = 16;
  int d_model = 32;
  int layers = 2;
  double noise = 0.0;
};

struct GradcheckArgs {
  std::optional<std::string> seed;
  int instances = 20;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SceneKind kind = kProfiles.at(a.profile);
  SynthConfig config = SynthConfig::for_kind(kind);
  config.focal_pairs = !a.no_focal_pairs;
  const auto scenes = synth_scenes(a.scenes, resolve_seed(a.seed), config);
  write_scenes(a.out, scenes);
  std::size_t objects = 0;
  for (const auto& s : scenes) objects += s.objects.size();
  out << fmt::format("wrote {} scenes ({} objects) to {}\n", scenes.size(), objects, a.out);
  if (!a.perfect_pred.empty()) {
    const auto preds = perfect_predictions(scenes, DatasetProfile::for_kind(kind), kModes.at(a.pred_mode));
    write_predictions(a.perfect_pred, preds);
    out << fmt::format("wrote {} {}-mode predictions to {}\n", preds.size(), a.pred_mode, a.perfect_pred);
  }
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  DatasetProfile profile = DatasetProfile::for_kind(kProfiles.at(a.profile));
  if (!a.depth_mode.empty()) profile.depth_mode = kDepthModes.at(a.depth_mode);
  if (!a.rotation_frame.empty()) profile.rotation_frame = kFrames.at(a.rotation_frame);
  const auto gt = read_scenes(a.gt);
  const auto preds = read_predictions(a.pred);
  PipelineOptions options;
  options.depth_error = kDepthErrors.at(a.depth_error);
  options.expected_mode = kModes.at(a.mode);
  const PipelineResult result = run_pipeline(gt, preds, profile, options);
  out << format_report(result.report) << "\n";
  if (!a.report.empty()) write_text_file(a.report, report_to_json(result.report) + "\n");
  return kExitOk;
}

int cmd_project(const ProjectArgs& a, std::ostream& out) {
  const std::string text = a.intrinsics.find('{') != std::string::npos ? a.intrinsics : read_text(a.intrinsics);
  const CameraIntrinsics cam = intrinsics_from_json(text);
  const Point2D p = project(parse_point(a.point), cam);
  out << format_number(p.u) << " " << format_number(p.v) << "\n";
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const DatasetProfile profile = DatasetProfile::for_kind(kProfiles.at(a.profile));
  const std::uint64_t seed = resolve_seed(a.seed);
  const auto scenes = read_scenes(a.data);

  ToyEncodingConfig encoding;
  encoding.d_model = a.d_model;
  encoding.noise_sigma = a.noise;
  const ToyEncoder encoder(encoding);
  const auto samples = build_toy_dataset(scenes, profile, encoder, seed);

  DecoderConfig model;
  model.d_model = a.d_model;
  model.num_layers = a.layers;
  TrainConfig config;
  config.epochs = a.epochs;
  config.batch_size = a.batch_size;
  config.learning_rate = a.lr;
  config.seed = seed;
  const TrainResult result = train(train_samples(samples), model, config);

  write_checkpoint(a.out, Checkpoint{result.params, config, encoding, result.loss_history});
  if (!a.loss_csv.empty()) write_text_file(a.loss_csv, loss_history_csv(result.loss_history));
  const auto preds = predict_toy(samples, result.params);
  if (!a.pred_out.empty()) write_predictions(a.pred_out, preds);

  PipelineOptions options;
  options.expected_mode = PredictionMode::Raw;
  const PipelineResult eval = run_pipeline(scenes, preds, profile, options);
  const double final_loss = result.loss_history.empty() ? result.initial_loss : result.loss_history.back();
  out << fmt::format("samples {} | epochs {} | initial_loss {:.6f} | final_loss {:.6f}\n", samples.size(),
                     result.loss_history.size(), result.initial_loss, final_loss);
  out << format_report(eval.report) << "\n";
  return kExitOk;
}

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  if (a.instances < 1) throw Error(ErrorKind::SchemaError, "--instances must be positive");
  const std::uint64_t seed = resolve_seed(a.seed);
  DecoderConfig config;
  config.d_model = 8;
  config.num_layers = 1;
  config.ff_dim = 16;
  config.head_hidden = 8;
  std::map<std::string, double> worst;
  for (int i = 0; i < a.instances; ++i) {
    const auto d = random_decoder_instance(seed + static_cast<std::uint64_t>(i), 5, config);
    for (const auto& g : decoder_gradcheck(d.sequence, d.params, d.target)) {
      worst["decoder." + g.name] = std::max(worst["decoder." + g.name], g.max_rel_error);
    }
    const auto m = random_mining_instance(seed + static_cast<std::uint64_t>(i), 3, 4, 6, 3, 5);
    for (const auto& g : spatial_mining_gradcheck(m.local, m.vit_tokens, m.params, m.depth_gt, m.d_tokens, 0.7)) {
      worst["attention." + g.name] = std::max(worst["attention." + g.name], g.max_rel_error);
    }
  }
  double overall = 0.0;
  for (const auto& [name, e] : worst) {
    out << fmt::format("{:<28} {:.3e}\n", name, e);
    overall = std::max(overall, e);
  }
  const bool ok = overall <= kGradcheckTolerance;
  out << fmt::format("max relative error {:.3e} over {} instances: {}\n", overall, a.instances,
                     ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitValidation;
}

template <typename V>
CLI::Validator choice(const std::map<std::string, V>& options) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : options) keys.push_back(k);
  return CLI::IsMember(keys);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monocular 3D grounding geometry, metrics and toy decoder"};
  app.name("mono3d");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic scenes as JSONL");
  s->add_option("--scenes", synth.scenes, "Number of scenes")->required()->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "RNG seed (default: $MONO3D_SEED or 0)");
  s->add_option("--profile", synth.profile, "indoor|outdoor")->check(choice(kProfiles));
  s->add_option("--out", synth.out, "Output scenes JSONL")->required();
  s->add_option("--perfect-pred", synth.perfect_pred, "Also write exact predictions to this path");
  s->add_option("--pred-mode", synth.pred_mode, "raw|box for --perfect-pred")->check(choice(kModes));
  s->add_flag("--no-focal-pairs", synth.no_focal_pairs, "Disable doubled-focal partner scenes");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "Score predictions against ground truth");
  e->add_option("--gt", eval.gt, "Ground-truth scenes JSONL")->required();
  e->add_option("--pred", eval.pred, "Predictions JSONL")->required();
  e->add_option("--mode", eval.mode, "raw|box")->required()->check(choice(kModes));
  e->add_option("--profile", eval.profile, "indoor|outdoor")->check(choice(kProfiles));
  e->add_option("--report", eval.report, "Write the report as JSON");
  e->add_option("--depth-error", eval.depth_error, "z|euclidean")->check(choice(kDepthErrors));
  e->add_option("--depth-mode", eval.depth_mode, "Override profile: virtual|fused")->check(choice(kDepthModes));
  e->add_option("--rotation-frame", eval.rotation_frame, "Override profile: allocentric|egocentric")
      ->check(choice(kFrames));

  ProjectArgs proj;
  auto* p = app.add_subcommand("project", "Project a camera-frame point to pixels");
  p->add_option("--intrinsics", proj.intrinsics, "Intrinsics JSON object or path to one")->required();
  p->add_option("--point", proj.point, "X,Y,Z in meters")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train-toy", "Train the toy decoder on synthetic scenes");
  t->add_option("--data", tr.data, "Scenes JSONL")->required();
  t->add_option("--epochs", tr.epochs, "Epochs")->check(CLI::PositiveNumber);
  t->add_option("--seed", tr.seed, "RNG seed (default: $MONO3D_SEED or 0)");
  t->add_option("--out", tr.out, "Checkpoint JSON")->required();
  t->add_option("--profile", tr.profile, "indoor|outdoor")->check(choice(kProfiles));
  t->add_option("--loss-csv", tr.loss_csv, "Per-epoch loss history CSV");
  t->add_option("--pred-out", tr.pred_out, "Raw-mode predictions on the training scenes");
  t->add_option("--lr", tr.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  t->add_option("--batch-size", tr.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  t->add_option("--d-model", tr.d_model, "Hidden width")->check(CLI::PositiveNumber);
  t->add_option("--layers", tr.layers, "Decoder layers")->check(CLI::PositiveNumber);
  t->add_option("--noise", tr.noise, "Token noise sigma")->check(CLI::NonNegativeNumber);

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of all analytic gradients");
  g->add_option("--seed", gc.seed, "RNG seed (default: $MONO3D_SEED or 0)");
  g->add_option("--instances", gc.instances, "Random instances");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (e->parsed()) return cmd_evaluate(eval, out);
    if (p->parsed()) return cmd_project(proj, out);
    if (t->parsed()) return cmd_train(tr, out);
    return cmd_gradcheck(gc, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return ex.kind() == ErrorKind::IoError ? kExitIo : kExitValidation;
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  }
}

}  // namespace mono3d::cli
