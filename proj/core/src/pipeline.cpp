#include <map>

#include "mono3d/error.hpp"
#include "mono3d/scene.hpp"

namespace mono3d {

namespace {

const char* mode_name(PredictionMode m) { return m == PredictionMode::Raw ? "raw" : "box"; }

}  // namespace

PipelineResult run_pipeline(const std::vector<SceneRecord>& gt, const std::vector<PredictionRecord>& preds,
                            const DatasetProfile& profile, const PipelineOptions& options) {
  struct Slot {
    const SceneRecord* scene;
    const SceneObject* object;
    const PredictionRecord* pred = nullptr;
  };
  std::map<std::string, Slot> slots;
  for (const auto& s : gt) {
    for (const auto& o : s.objects) slots.emplace(query_key(s.image_id, o.object_id), Slot{&s, &o});
  }

  for (const auto& p : preds) {
    auto it = slots.find(query_key(p.image_id, p.object_id));
    if (it == slots.end()) {
      throw Error(ErrorKind::UnmatchedPrediction,
                  "prediction for object '" + p.object_id + "' in image '" + p.image_id +
                      "' has no ground-truth counterpart");
    }
    if (it->second.pred) {
      throw Error(ErrorKind::DuplicatePrediction,
                  "more than one prediction for object '" + p.object_id + "' in image '" + p.image_id + "'");
    }
    if (options.expected_mode && p.mode() != *options.expected_mode) {
      throw Error(ErrorKind::SchemaError, "prediction for object '" + p.object_id + "' in image '" + p.image_id +
                                              "' is " + mode_name(p.mode()) + "-mode, expected " +
                                              mode_name(*options.expected_mode));
    }
    it->second.pred = &p;
  }

  PipelineResult result;
  for (const auto& s : gt) {
    for (const auto& o : s.objects) {
      const Slot& slot = slots.at(query_key(s.image_id, o.object_id));
      std::string id = s.image_id + "/" + o.object_id;
      if (!slot.pred) {
        result.per_query.push_back(QueryResult::missing_prediction(std::move(id)));
        continue;
      }
      OrientedBox3D box;
      if (const auto* raw = std::get_if<RawPayload>(&slot.pred->payload)) {
        box = box_from_raw(raw->raw, s.intrinsics, profile, raw->h2d ? raw->h2d : std::optional<double>(o.h2d));
      } else {
        box = std::get<OrientedBox3D>(slot.pred->payload);
      }
      result.per_query.push_back(score_query(box, o.box3d, std::move(id), options.depth_error));
    }
  }
  result.report = aggregate(result.per_query);
  return result;
}

}  // namespace mono3d
