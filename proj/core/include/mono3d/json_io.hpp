#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mono3d/scene.hpp"

namespace mono3d {

// JSONL: one record per line, numbers written with 17 significant digits so
// that write(read(write(x))) is byte-identical to write(x). NaN and
// infinities are rejected in every numeric field.

std::string scene_to_json(const SceneRecord& record);
SceneRecord scene_from_json(std::string_view line);

std::string prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(std::string_view line);

std::string intrinsics_to_json(const CameraIntrinsics& cam);
CameraIntrinsics intrinsics_from_json(std::string_view text);

std::vector<SceneRecord> read_scenes(const std::filesystem::path& path);
void write_scenes(const std::filesystem::path& path, const std::vector<SceneRecord>& records);

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records);

/// Formats a double with 17 significant digits (shortest form for integers).
std::string format_number(double value);

/// Writes `text` to `path`, truncating. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mono3d
