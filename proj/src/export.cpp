#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "frbm/geometry.hpp"

namespace frbm {
namespace {

using nlohmann::json;

constexpr double kPixelsPerUnit = 200.0;

const char* role_name(Role r) {
  switch (r) {
    case Role::Absorbing: return "absorbing";
    case Role::Reflecting: return "reflecting";
    case Role::Monitor: return "monitor";
  }
  return "unknown";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v + 0.0);
  return buf;
}

// SVG user units: x right, y down.
std::string px(double x) { return num(x * kPixelsPerUnit); }
std::string py(double y) { return num(-y * kPixelsPerUnit); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace

std::string geometry_svg(const GeometryModel& model) {
  double extent = 1.0;
  for (const auto& a : model.arcs()) extent = std::max(extent, std::abs(a.arc.center.x) + a.arc.radius);
  for (const auto& a : model.arcs()) extent = std::max(extent, std::abs(a.arc.center.y) + a.arc.radius);
  for (const auto& s : model.extra_segments()) {
    extent = std::max({extent, std::abs(s.segment.a.x), std::abs(s.segment.a.y), std::abs(s.segment.b.x),
                       std::abs(s.segment.b.y)});
  }
  const double half = extent * 1.02;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << px(-half) << ' ' << px(-half) << ' '
     << num(2 * half * kPixelsPerUnit) << ' ' << num(2 * half * kPixelsPerUnit) << "\">\n";
  os << "<rect x=\"" << px(-half) << "\" y=\"" << px(-half) << "\" width=\"" << num(2 * half * kPixelsPerUnit)
     << "\" height=\"" << num(2 * half * kPixelsPerUnit) << "\" fill=\"white\"/>\n";

  if (model.has_cantor()) {
    const int n = model.depth();
    const double s = model.side(n) / 2.0;
    os << "<g fill=\"black\">\n";
    for (std::size_t i = 0; i < model.square_count(n); ++i) {
      const Vec2 c = model.center(n, i);
      os << "<rect x=\"" << px(c.x - s) << "\" y=\"" << py(c.y + s) << "\" width=\"" << num(2 * s * kPixelsPerUnit)
         << "\" height=\"" << num(2 * s * kPixelsPerUnit) << "\"/>\n";
    }
    os << "</g>\n";
    os << "<g stroke=\"" << (model.barrier_role() == Role::Absorbing ? "red" : "blue")
       << "\" stroke-width=\"0.5\" fill=\"none\">\n";
    for (const auto& box : model.barrier_boxes()) {
      for (const auto& seg : box.segments()) {
        os << "<line x1=\"" << px(seg.a.x) << "\" y1=\"" << py(seg.a.y) << "\" x2=\"" << px(seg.b.x) << "\" y2=\""
           << py(seg.b.y) << "\"/>\n";
      }
    }
    os << "</g>\n";
  }
  for (const auto& s : model.extra_segments()) {
    os << "<line x1=\"" << px(s.segment.a.x) << "\" y1=\"" << py(s.segment.a.y) << "\" x2=\"" << px(s.segment.b.x)
       << "\" y2=\"" << py(s.segment.b.y) << "\" stroke=\"" << (s.role == Role::Absorbing ? "black" : "blue")
       << "\" stroke-width=\"0.5\"/>\n";
  }
  for (const auto& a : model.arcs()) {
    const char* color = a.role == Role::Absorbing ? "black" : (a.role == Role::Monitor ? "green" : "gray");
    if (a.arc.full()) {
      os << "<circle cx=\"" << px(a.arc.center.x) << "\" cy=\"" << py(a.arc.center.y) << "\" r=\""
         << num(a.arc.radius * kPixelsPerUnit) << "\" stroke=\"" << color << "\" stroke-width=\"1\" fill=\"none\"/>\n";
      continue;
    }
    const Vec2 p0 = a.arc.center + Vec2{std::cos(a.arc.start), std::sin(a.arc.start)} * a.arc.radius;
    const double end = a.arc.start + a.arc.sweep;
    const Vec2 p1 = a.arc.center + Vec2{std::cos(end), std::sin(end)} * a.arc.radius;
    const int large = a.arc.sweep > 3.141592653589793 ? 1 : 0;
    // Counter-clockwise in model coordinates is clockwise (sweep flag 0) once y is flipped.
    os << "<path d=\"M " << px(p0.x) << ' ' << py(p0.y) << " A " << num(a.arc.radius * kPixelsPerUnit) << ' '
       << num(a.arc.radius * kPixelsPerUnit) << " 0 " << large << " 0 " << px(p1.x) << ' ' << py(p1.y)
       << "\" stroke=\"" << color << "\" stroke-width=\"0.5\" fill=\"none\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string geometry_json(const GeometryModel& model) {
  json doc;
  doc["schema"] = "frbm.geometry/1";
  if (model.has_cantor()) {
    const GeometrySpec& s = model.spec();
    doc["spec"] = {{"alpha", s.alpha},   {"b", s.b},
                   {"ell", s.ell},       {"n_gen", s.n_gen},
                   {"r0", s.r0},         {"barrier_gens", {s.barrier_gen_min, s.barrier_max()}}};
  }
  json features = json::array();
  for (const auto& f : model.features()) {
    json j;
    j["kind"] = to_string(f.kind);
    j["role"] = role_name(f.role);
    j["owner_word"] = f.owner ? json(f.owner->str()) : json(nullptr);
    if (f.is_arc) {
      j["center"] = {f.arc.center.x, f.arc.center.y};
      j["radius"] = f.arc.radius;
      j["angles"] = {f.arc.start, f.arc.start + f.arc.sweep};
    } else {
      j["endpoints"] = {{f.segment.a.x, f.segment.a.y}, {f.segment.b.x, f.segment.b.y}};
    }
    features.push_back(std::move(j));
  }
  doc["features"] = std::move(features);
  return doc.dump(1) + "\n";
}

void export_geometry(const GeometryModel& model, const std::string& path_stem) {
  write_file(path_stem + ".svg", geometry_svg(model));
  write_file(path_stem + ".json", geometry_json(model));
}

}  // namespace frbm
