#pragma once

// Internal helpers shared by the JSON readers/writers. Not installed.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mono3d/box3d.hpp"
#include "mono3d/camera.hpp"

namespace mono3d::detail {

void dump_compact(const nlohmann::ordered_json& j, std::string& out);
std::string dump_compact(const nlohmann::ordered_json& j);
std::optional<std::string> find_non_finite_field(std::string_view text);
nlohmann::json parse_line(std::string_view line);

const nlohmann::json& field(const nlohmann::json& obj, const char* name, const std::string& path);
double number(const nlohmann::json& obj, const char* name, const std::string& path);
std::string string(const nlohmann::json& obj, const char* name, const std::string& path);
std::vector<double> numbers(const nlohmann::json& obj, const char* name, std::size_t count, const std::string& path);

nlohmann::ordered_json box_to_json(const OrientedBox3D& b);
OrientedBox3D box_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace mono3d::detail
