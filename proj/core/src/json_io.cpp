#include "mono3d/json_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "mono3d/error.hpp"
#include "json_detail.hpp"

namespace mono3d {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_number(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::SchemaError, "refusing to serialize a non-finite number");
  return fmt::format("{:.17g}", value);
}

namespace detail {

void dump_compact(const ordered_json& j, std::string& out) {
  switch (j.type()) {
    case ordered_json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += ordered_json(key).dump();
        out += ':';
        dump_compact(value, out);
      }
      out += '}';
      break;
    }
    case ordered_json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_compact(j[i], out);
      }
      out += ']';
      break;
    }
    case ordered_json::value_t::number_float:
      out += format_number(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

std::string dump_compact(const ordered_json& j) {
  std::string out;
  dump_compact(j, out);
  return out;
}

// nlohmann rejects NaN/Infinity tokens as a syntax error; find the offending
// key so the caller gets a schema error naming the field instead.
std::optional<std::string> find_non_finite_field(std::string_view text) {
  std::string last_string;
  std::string key;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        if (i + 1 < text.size()) last_string += text[++i];
      } else if (c == '"') {
        in_string = false;
      } else {
        last_string += c;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      last_string.clear();
    } else if (c == ':') {
      key = last_string;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      const std::string word(text.substr(i, j - i));
      if (word == "NaN" || word == "nan" || word == "Infinity" || word == "inf" || word == "Inf") {
        return key.empty() ? std::string("<value>") : key;
      }
      i = j - 1;
    }
  }
  return std::nullopt;
}

json parse_line(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    if (auto field = find_non_finite_field(line)) {
      throw Error(ErrorKind::SchemaError, "field '" + *field + "' is not a finite number");
    }
    throw Error(ErrorKind::ParseError, e.what());
  }
}

const json& field(const json& obj, const char* name, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorKind::SchemaError, "'" + path + "' must be an object");
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw Error(ErrorKind::SchemaError, "missing field '" + (path.empty() ? name : path + "." + name) + "'");
  }
  return *it;
}

double number(const json& obj, const char* name, const std::string& path) {
  const json& v = field(obj, name, path);
  const std::string full = path.empty() ? name : path + "." + name;
  if (!v.is_number()) throw Error(ErrorKind::SchemaError, "field '" + full + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorKind::SchemaError, "field '" + full + "' is not a finite number");
  return d;
}

std::string string(const json& obj, const char* name, const std::string& path) {
  const json& v = field(obj, name, path);
  if (!v.is_string()) {
    throw Error(ErrorKind::SchemaError, "field '" + (path.empty() ? name : path + "." + name) + "' must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const char* name, std::size_t count, const std::string& path) {
  const json& v = field(obj, name, path);
  const std::string full = path.empty() ? name : path + "." + name;
  if (!v.is_array() || v.size() != count) {
    throw Error(ErrorKind::SchemaError, "field '" + full + "' must be an array of " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw Error(ErrorKind::SchemaError, "field '" + full + "' must hold finite numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

ordered_json array_of(std::initializer_list<double> values) {
  ordered_json a = ordered_json::array();
  for (double v : values) a.push_back(v);
  return a;
}

ordered_json box_to_json(const OrientedBox3D& b) {
  ordered_json j;
  j["center"] = array_of({b.center.x(), b.center.y(), b.center.z()});
  j["dims"] = array_of({b.dims.x(), b.dims.y(), b.dims.z()});
  ordered_json rot = ordered_json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(b.rot(r, c));
  j["rot"] = rot;
  return j;
}

OrientedBox3D box_from_json(const json& j, const std::string& path) {
  OrientedBox3D b;
  const auto c = numbers(j, "center", 3, path);
  const auto d = numbers(j, "dims", 3, path);
  const auto r = numbers(j, "rot", 9, path);
  b.center = Vec3(c[0], c[1], c[2]);
  b.dims = Vec3(d[0], d[1], d[2]);
  for (int i = 0; i < 9; ++i) b.rot(i / 3, i % 3) = r[i];
  try {
    b.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::SchemaError, "field '" + path + "': " + e.what());
  }
  return b;
}

ordered_json intrinsics_json(const CameraIntrinsics& cam) {
  ordered_json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  return j;
}

CameraIntrinsics intrinsics_from(const json& j, const std::string& path) {
  CameraIntrinsics cam;
  cam.fx = number(j, "fx", path);
  cam.fy = number(j, "fy", path);
  cam.cx = number(j, "cx", path);
  cam.cy = number(j, "cy", path);
  cam.width = number(j, "width", path);
  cam.height = number(j, "height", path);
  try {
    cam.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::SchemaError, "field '" + path + "': " + e.what());
  }
  return cam;
}

}  // namespace detail

using namespace detail;

std::string scene_to_json(const SceneRecord& record) {
  ordered_json j;
  j["image_id"] = record.image_id;
  j["intrinsics"] = intrinsics_json(record.intrinsics);
  ordered_json objects = ordered_json::array();
  for (const auto& o : record.objects) {
    ordered_json oj;
    oj["object_id"] = o.object_id;
    oj["caption"] = o.caption;
    oj["box3d"] = box_to_json(o.box3d);
    oj["box2d"] = array_of({o.box2d[0], o.box2d[1], o.box2d[2], o.box2d[3]});
    oj["h2d"] = o.h2d;
    objects.push_back(std::move(oj));
  }
  j["objects"] = std::move(objects);
  if (record.focal_pair_of) j["focal_pair_of"] = *record.focal_pair_of;
  return dump_compact(j);
}

SceneRecord scene_from_json(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, "record must be a JSON object");
  SceneRecord r;
  r.image_id = string(j, "image_id", "");
  r.intrinsics = intrinsics_from(field(j, "intrinsics", ""), "intrinsics");
  const json& objs = field(j, "objects", "");
  if (!objs.is_array()) throw Error(ErrorKind::SchemaError, "field 'objects' must be an array");
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string path = "objects[" + std::to_string(i) + "]";
    const json& oj = objs[i];
    SceneObject o;
    o.object_id = string(oj, "object_id", path);
    o.caption = string(oj, "caption", path);
    o.box3d = box_from_json(field(oj, "box3d", path), path + ".box3d");
    const auto b2 = numbers(oj, "box2d", 4, path);
    std::copy(b2.begin(), b2.end(), o.box2d.begin());
    o.h2d = number(oj, "h2d", path);
    r.objects.push_back(std::move(o));
  }
  if (j.contains("focal_pair_of")) r.focal_pair_of = string(j, "focal_pair_of", "");
  r.validate();
  return r;
}

std::string prediction_to_json(const PredictionRecord& record) {
  ordered_json j;
  j["image_id"] = record.image_id;
  j["object_id"] = record.object_id;
  if (const auto* raw = std::get_if<RawPayload>(&record.payload)) {
    ordered_json rj;
    rj["u_norm"] = raw->raw.u_norm;
    rj["v_norm"] = raw->raw.v_norm;
    rj["d_v"] = raw->raw.d_v;
    rj["L"] = raw->raw.L;
    rj["W"] = raw->raw.W;
    rj["H"] = raw->raw.H;
    ordered_json rot = ordered_json::array();
    for (double v : raw->raw.rot6d.to_array()) rot.push_back(v);
    rj["rot6d"] = rot;
    if (raw->h2d) rj["h2d"] = *raw->h2d;
    j["raw"] = std::move(rj);
  } else {
    j["box"] = box_to_json(std::get<OrientedBox3D>(record.payload));
  }
  return dump_compact(j);
}

PredictionRecord prediction_from_json(std::string_view line) {
  const json j = parse_line(line);
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, "record must be a JSON object");
  PredictionRecord r;
  r.image_id = string(j, "image_id", "");
  r.object_id = string(j, "object_id", "");
  const bool has_raw = j.contains("raw");
  const bool has_box = j.contains("box");
  if (has_raw == has_box) throw Error(ErrorKind::SchemaError, "exactly one of 'raw' or 'box' is required");
  if (has_raw) {
    const json& rj = j["raw"];
    RawPayload p;
    p.raw.u_norm = number(rj, "u_norm", "raw");
    p.raw.v_norm = number(rj, "v_norm", "raw");
    p.raw.d_v = number(rj, "d_v", "raw");
    p.raw.L = number(rj, "L", "raw");
    p.raw.W = number(rj, "W", "raw");
    p.raw.H = number(rj, "H", "raw");
    const auto rot = numbers(rj, "rot6d", 6, "raw");
    p.raw.rot6d = Rot6D{Vec3(rot[0], rot[1], rot[2]), Vec3(rot[3], rot[4], rot[5])};
    if (rj.contains("h2d")) p.h2d = number(rj, "h2d", "raw");
    if (p.raw.d_v <= 0.0) throw Error(ErrorKind::SchemaError, "field 'raw.d_v' must be > 0");
    if (p.raw.L <= 0.0 || p.raw.W <= 0.0 || p.raw.H <= 0.0) {
      throw Error(ErrorKind::SchemaError, "fields 'raw.L', 'raw.W', 'raw.H' must be > 0");
    }
    r.payload = p;
  } else {
    r.payload = box_from_json(j["box"], "box");
  }
  return r;
}

std::string intrinsics_to_json(const CameraIntrinsics& cam) { return dump_compact(intrinsics_json(cam)); }

CameraIntrinsics intrinsics_from_json(std::string_view text) {
  return intrinsics_from(parse_line(text), "intrinsics");
}

namespace {

template <typename Record, typename Parse>
std::vector<Record> read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error(ErrorKind::IoError, "read failure on " + path.string());
  return out;
}

template <typename Record, typename Dump>
void write_lines(const std::filesystem::path& path, const std::vector<Record>& records, Dump dump) {
  std::string text;
  for (const auto& r : records) {
    text += dump(r);
    text += '\n';
  }
  write_text_file(path, text);
}

}  // namespace

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failure on " + path.string());
}

std::vector<SceneRecord> read_scenes(const std::filesystem::path& path) {
  return read_lines<SceneRecord>(path, [](const std::string& l) { return scene_from_json(l); });
}

void write_scenes(const std::filesystem::path& path, const std::vector<SceneRecord>& records) {
  write_lines(path, records, [](const SceneRecord& r) { return scene_to_json(r); });
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  auto preds = read_lines<PredictionRecord>(path, [](const std::string& l) { return prediction_from_json(l); });
  std::set<std::string> seen;
  for (const auto& p : preds) {
    if (!seen.insert(query_key(p.image_id, p.object_id)).second) {
      throw Error(ErrorKind::DuplicatePrediction,
                  path.string() + ": more than one prediction for object '" + p.object_id + "' in image '" +
                      p.image_id + "'");
    }
  }
  return preds;
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& records) {
  write_lines(path, records, [](const PredictionRecord& r) { return prediction_to_json(r); });
}

}  // namespace mono3d
