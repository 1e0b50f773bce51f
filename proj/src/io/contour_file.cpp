#include <cmath>
#include <set>

#include <json.hpp>

#include "vt/error.hpp"
#include "vt/io.hpp"

namespace vt::io {
namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw FormatError("schema", where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw FormatError("schema", where + ": unknown key '" + key + "'");
  }
  for (auto a : allowed) {
    if (!obj.contains(std::string(a))) throw FormatError("schema", where + ": missing key '" + std::string(a) + "'");
  }
}

std::array<double, kContourPoints> read_axis(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(kContourPoints)) {
    throw FormatError("length", where + ": expected an array of " + std::to_string(kContourPoints) + " numbers");
  }
  std::array<double, kContourPoints> out{};
  for (int i = 0; i < kContourPoints; ++i) {
    if (!arr[i].is_number()) throw FormatError("schema", where + ": non-numeric coordinate");
    out[i] = arr[i].get<double>();
    if (!std::isfinite(out[i])) throw FormatError("non_finite", where + ": non-finite coordinate");
  }
  return out;
}

}  // namespace

ContourDocument parse_contours(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError("json", std::string("contour file is not valid JSON: ") + e.what());
  }
  require_keys(root, {"acquisition_id", "session_id", "pixel_mm", "frames"}, "contour file");
  ContourDocument doc;
  if (!root["acquisition_id"].is_string() || !root["session_id"].is_string()) {
    throw FormatError("schema", "contour file: ids must be strings");
  }
  doc.acquisition_id = root["acquisition_id"].get<std::string>();
  doc.session_id = root["session_id"].get<std::string>();
  if (!root["pixel_mm"].is_number() || !(root["pixel_mm"].get<double>() > 0.0)) {
    throw FormatError("schema", "contour file: pixel_mm must be a positive number");
  }
  doc.pixel_mm = root["pixel_mm"].get<double>();
  if (!root["frames"].is_array()) throw FormatError("schema", "contour file: frames must be an array");

  for (std::size_t f = 0; f < root["frames"].size(); ++f) {
    const json& jf = root["frames"][f];
    const std::string where = "frame #" + std::to_string(f);
    require_keys(jf, {"index", "articulators"}, where);
    if (!jf["index"].is_number_integer()) throw FormatError("schema", where + ": index must be an integer");
    ContourFrame frame;
    frame.frame_index = jf["index"].get<int>();
    if (!doc.frames.empty() && frame.frame_index <= doc.frames.back().frame_index) {
      throw FormatError("order", where + ": frame indices must be strictly increasing");
    }
    if (!jf["articulators"].is_object()) throw FormatError("schema", where + ": articulators must be an object");
    for (const auto& [name, ja] : jf["articulators"].items()) {
      auto id = articulator_from_name(name);
      if (!id) throw FormatError("unknown_articulator", where + ": unknown articulator '" + name + "'");
      require_keys(ja, {"x", "y"}, where + "/" + name);
      auto xs = read_axis(ja["x"], where + "/" + name + "/x");
      auto ys = read_axis(ja["y"], where + "/" + name + "/y");
      Contour c;
      for (int i = 0; i < kContourPoints; ++i) c[i] = {xs[i] * doc.pixel_mm, ys[i] * doc.pixel_mm};
      frame.set(*id, c);
    }
    try {
      frame.validate();
    } catch (const StructuralError& e) {
      throw FormatError("missing_articulator", e.what());
    }
    doc.frames.push_back(std::move(frame));
  }
  return doc;
}

std::string dump_contours(const ContourDocument& doc) {
  json root;
  root["acquisition_id"] = doc.acquisition_id;
  root["session_id"] = doc.session_id;
  root["pixel_mm"] = doc.pixel_mm;
  json frames = json::array();
  for (const ContourFrame& f : doc.frames) {
    json jf;
    jf["index"] = f.frame_index;
    json arts = json::object();
    for (int a = 0; a < kNumArticulatorIds; ++a) {
      if (!f.contours[a]) continue;
      json xs = json::array(), ys = json::array();
      for (const Point& p : *f.contours[a]) {
        xs.push_back(p.x / doc.pixel_mm);
        ys.push_back(p.y / doc.pixel_mm);
      }
      arts[std::string(articulator_name(static_cast<ArticulatorId>(a)))] = {{"x", xs}, {"y", ys}};
    }
    jf["articulators"] = std::move(arts);
    frames.push_back(std::move(jf));
  }
  root["frames"] = std::move(frames);
  return root.dump();
}

ContourDocument read_contours(const std::filesystem::path& path) {
  try {
    return parse_contours(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(e.code(), path.string() + ": " + e.what());
  }
}

void write_contours(const std::filesystem::path& path, const ContourDocument& doc) {
  write_file_bytes(path, dump_contours(doc));
}

}  // namespace vt::io
