#include "bawkit/materials.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bawkit/errors.hpp"
#include "decimal.hpp"

namespace bawkit {

using json = nlohmann::json;

double Material::c33d() const {
  if (e33 == 0.0) return c33e;
  return c33e + e33 * e33 / eps33s;
}

double Material::coupling() const {
  if (e33 == 0.0) return 0.0;
  return e33 * e33 / (c33d() * eps33s);
}

std::string_view to_string(LayerRole role) {
  switch (role) {
    case LayerRole::piezo: return "piezo";
    case LayerRole::electrode: return "electrode";
    case LayerRole::passive: return "passive";
  }
  return "passive";
}

std::string_view to_string(Boundary boundary) {
  return boundary == Boundary::rigid ? "rigid" : "free";
}

void validate_material(const Material& m, bool piezo) {
  const std::string where = "materials." + m.name;
  auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!finite_positive(m.density)) throw ValidationError(where + ".density", "must be > 0");
  if (!finite_positive(m.c33e)) throw ValidationError(where + ".c33e", "must be > 0");
  if (!finite_positive(m.q_mech)) throw ValidationError(where + ".q_mech", "must be > 0");
  if (!std::isfinite(m.tan_delta) || m.tan_delta < 0.0) {
    throw ValidationError(where + ".tan_delta", "must be >= 0");
  }
  if (!std::isfinite(m.e33)) throw ValidationError(where + ".e33", "must be finite");
  if (m.e33 != 0.0 && !finite_positive(m.eps33s)) {
    throw ValidationError(where + ".eps33s", "permittivity required (> 0) when e33 != 0");
  }
  if (piezo && m.e33 == 0.0) {
    throw ValidationError(where + ".e33", "piezo layer requires e33 != 0");
  }
}

Stack::Stack(std::vector<Layer> layers, double area_m2, double rs_ohm, Boundary bottom,
             Boundary top)
    : layers_(std::move(layers)), area_(area_m2), rs_(rs_ohm), bottom_(bottom), top_(top) {
  validate(false);
}

Stack::Stack(Uncoupled, std::vector<Layer> layers, double area_m2, double rs_ohm,
             Boundary bottom, Boundary top)
    : layers_(std::move(layers)), area_(area_m2), rs_(rs_ohm), bottom_(bottom), top_(top) {
  validate(true);
}

void Stack::validate(bool allow_uncoupled) {
  if (layers_.empty()) throw ValidationError("layers", "at least one layer required");
  if (!std::isfinite(area_) || area_ <= 0.0) throw ValidationError("area_m2", "must be > 0");
  if (!std::isfinite(rs_) || rs_ < 0.0) throw ValidationError("rs_ohm", "must be >= 0");
  std::size_t piezo_count = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string where = "layers[" + std::to_string(i) + "]";
    if (!std::isfinite(l.thickness) || l.thickness <= 0.0) {
      throw ValidationError(where + ".thickness_nm", "must be > 0");
    }
    const bool is_piezo = l.role == LayerRole::piezo;
    validate_material(l.material, is_piezo && !allow_uncoupled);
    if (is_piezo && !(l.material.eps33s > 0.0)) {
      throw ValidationError(where + ".material.eps33s", "piezo layer requires eps33s > 0");
    }
    if (is_piezo) {
      ++piezo_count;
      piezo_ = i;
    }
  }
  if (piezo_count != 1) {
    throw ValidationError("layers", "exactly one piezo layer required, found " +
                                        std::to_string(piezo_count));
  }
}

double Stack::total_thickness() const {
  double t = 0.0;
  for (const auto& l : layers_) t += l.thickness;
  return t;
}

Stack Stack::with_thickness(std::size_t i, double thickness_m) const {
  auto layers = layers_;
  layers.at(i).thickness = thickness_m;
  return Stack(std::move(layers), area_, rs_, bottom_, top_);
}

Stack Stack::scaled(double factor) const {
  auto layers = layers_;
  for (auto& l : layers) l.thickness *= factor;
  return Stack(std::move(layers), area_, rs_, bottom_, top_);
}

Stack Stack::with_piezo_material(const Material& m) const {
  auto layers = layers_;
  layers[piezo_].material = m;
  return Stack(std::move(layers), area_, rs_, bottom_, top_);
}

Stack Stack::without_coupling() const {
  auto layers = layers_;
  layers[piezo_].material.e33 = 0.0;
  return Stack(Uncoupled{}, std::move(layers), area_, rs_, bottom_, top_);
}

DerivedConstants derive_constants(const Stack& stack) {
  DerivedConstants out;
  out.layers.reserve(stack.size());
  for (const Layer& l : stack.layers()) {
    LayerConstants lc;
    const Material& m = l.material;
    lc.c_eff = l.role == LayerRole::piezo ? m.c33d() : m.c33e;
    lc.stiffness = Complex(lc.c_eff, lc.c_eff * m.inverse_q());
    // Principal root: Im(v) >= 0, so k = w/v has Im(k) <= 0 and exp(-jkz)
    // decays along +z under the exp(+jwt) convention.
    lc.velocity = std::sqrt(lc.stiffness / m.density);
    lc.impedance = m.density * lc.velocity * stack.area();
    out.layers.push_back(lc);
  }
  const Layer& p = stack.piezo();
  out.c0 = p.material.eps33s * stack.area() / p.thickness;
  out.c0_lossy = out.c0 * Complex(1.0, -p.material.tan_delta);
  out.coupling = p.material.coupling();
  out.f0_piezo = out.layers[stack.piezo_index()].velocity.real() / (2.0 * p.thickness);
  return out;
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + key, "missing required key");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ValidationError(field, "expected a number");
  return v.get<double>();
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) throw ValidationError(field, "expected a string");
  return v.get<std::string>();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

Material material_from_json(const std::string& name, const json& j) {
  const std::string where = "materials." + name;
  if (!j.is_object()) throw ValidationError(where, "expected an object");
  reject_unknown_keys(j,
                      {"density", "c33e", "e33", "eps33s", "q_mech", "tan_delta", "lossless",
                       "citation"},
                      where);
  Material m;
  m.name = name;
  m.density = number(require(j, "density", where + "."), where + ".density");
  m.c33e = number(require(j, "c33e", where + "."), where + ".c33e");
  m.q_mech = number(require(j, "q_mech", where + "."), where + ".q_mech");
  if (j.contains("e33")) m.e33 = number(j["e33"], where + ".e33");
  if (j.contains("eps33s")) m.eps33s = number(j["eps33s"], where + ".eps33s");
  if (j.contains("tan_delta")) m.tan_delta = number(j["tan_delta"], where + ".tan_delta");
  if (j.contains("lossless")) {
    if (!j["lossless"].is_boolean()) throw ValidationError(where + ".lossless", "expected bool");
    m.lossless = j["lossless"].get<bool>();
  }
  if (j.contains("citation")) m.citation = text(j["citation"], where + ".citation");
  return m;
}

json material_to_json(const Material& m) {
  json j;
  j["density"] = m.density;
  j["c33e"] = m.c33e;
  j["e33"] = m.e33;
  j["eps33s"] = m.eps33s;
  j["q_mech"] = m.q_mech;
  j["tan_delta"] = m.tan_delta;
  j["lossless"] = m.lossless;
  j["citation"] = m.citation;
  return j;
}

LayerRole role_from_text(const std::string& s, const std::string& field) {
  if (s == "piezo") return LayerRole::piezo;
  if (s == "electrode") return LayerRole::electrode;
  if (s == "passive") return LayerRole::passive;
  throw ValidationError(field, "role must be piezo, electrode or passive");
}

Boundary boundary_from_text(const std::string& s, const std::string& field) {
  if (s == "free") return Boundary::free;
  if (s == "rigid") return Boundary::rigid;
  throw ValidationError(field, "boundary must be free or rigid");
}

// nm -> m through the decimal text of the number, so "240" becomes the
// double nearest to 240e-9 rather than 240 * 1e-9.
double nm_to_m(double nm) { return *detail::parse_scaled(detail::shortest(nm), -9); }

// Nanometre value that loads back to exactly m, if one exists. Doubles in
// nm are coarser than doubles in m, so some thicknesses have none.
std::optional<double> m_to_nm(double m) {
  double nm = *detail::parse_double(detail::format_scaled(m, -9));
  if (nm_to_m(nm) == m) return nm;
  double lo = nm;
  double hi = nm;
  for (int i = 0; i < 8; ++i) {
    lo = std::nextafter(lo, -INFINITY);
    hi = std::nextafter(hi, INFINITY);
    if (nm_to_m(lo) == m) return lo;
    if (nm_to_m(hi) == m) return hi;
  }
  return std::nullopt;
}

}  // namespace

std::map<std::string, Material> load_material_library(std::string_view json_text) {
  const json root = parse_json(json_text);
  if (!root.is_object()) throw ValidationError("materials", "expected an object at top level");
  reject_unknown_keys(root, {"materials"}, "");
  const json& mats = require(root, "materials", "");
  if (!mats.is_object()) throw ValidationError("materials", "expected an object");
  std::map<std::string, Material> out;
  for (const auto& [name, value] : mats.items()) {
    Material m = material_from_json(name, value);
    validate_material(m, false);
    out.emplace(name, std::move(m));
  }
  return out;
}

Stack load_stack(std::string_view json_text) {
  const json root = parse_json(json_text);
  if (!root.is_object()) throw ValidationError("stack", "expected an object at top level");
  reject_unknown_keys(root, {"area_m2", "diameter_um", "rs_ohm", "boundary", "materials", "layers"},
                      "");

  double area = 0.0;
  const bool has_area = root.contains("area_m2");
  const bool has_diameter = root.contains("diameter_um");
  if (has_area == has_diameter) {
    throw ValidationError("area_m2", "exactly one of area_m2 or diameter_um is required");
  }
  if (has_area) {
    area = number(root["area_m2"], "area_m2");
  } else {
    const double d_um = number(root["diameter_um"], "diameter_um");
    if (!(d_um > 0.0)) throw ValidationError("diameter_um", "must be > 0");
    const double r = *detail::parse_scaled(detail::shortest(d_um), -6) / 2.0;
    area = std::numbers::pi * r * r;
  }

  double rs = 0.0;
  if (root.contains("rs_ohm")) rs = number(root["rs_ohm"], "rs_ohm");

  Boundary bottom = Boundary::free;
  Boundary top = Boundary::free;
  if (root.contains("boundary")) {
    const json& b = root["boundary"];
    if (!b.is_object()) throw ValidationError("boundary", "expected an object");
    reject_unknown_keys(b, {"bottom", "top"}, "boundary");
    if (b.contains("bottom")) bottom = boundary_from_text(text(b["bottom"], "boundary.bottom"), "boundary.bottom");
    if (b.contains("top")) top = boundary_from_text(text(b["top"], "boundary.top"), "boundary.top");
  }

  const json& mats = require(root, "materials", "");
  if (!mats.is_object()) throw ValidationError("materials", "expected an object");
  std::map<std::string, Material> library;
  for (const auto& [name, value] : mats.items()) library.emplace(name, material_from_json(name, value));

  const json& layers_json = require(root, "layers", "");
  if (!layers_json.is_array()) throw ValidationError("layers", "expected an array");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < layers_json.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    const json& lj = layers_json[i];
    if (!lj.is_object()) throw ValidationError(where, "expected an object");
    reject_unknown_keys(lj, {"material", "thickness_nm", "thickness_m", "role"}, where);
    const std::string mat_name = text(require(lj, "material", where + "."), where + ".material");
    auto it = library.find(mat_name);
    if (it == library.end()) throw ValidationError(where + ".material", "unknown material '" + mat_name + "'");
    Layer layer;
    layer.material = it->second;
    if (lj.contains("thickness_nm") == lj.contains("thickness_m")) {
      throw ValidationError(where + ".thickness_nm", "exactly one of thickness_nm or thickness_m is required");
    }
    if (lj.contains("thickness_nm")) {
      const double t_nm = number(lj["thickness_nm"], where + ".thickness_nm");
      if (!std::isfinite(t_nm) || t_nm <= 0.0) throw ValidationError(where + ".thickness_nm", "must be > 0");
      layer.thickness = nm_to_m(t_nm);
    } else {
      layer.thickness = number(lj["thickness_m"], where + ".thickness_m");
    }
    layer.role = role_from_text(text(require(lj, "role", where + "."), where + ".role"), where + ".role");
    layers.push_back(std::move(layer));
  }
  return Stack(std::move(layers), area, rs, bottom, top);
}

std::string serialize_stack(const Stack& stack) {
  json root;
  root["area_m2"] = stack.area();
  root["rs_ohm"] = stack.rs();
  root["boundary"] = {{"bottom", std::string(to_string(stack.bottom()))},
                      {"top", std::string(to_string(stack.top()))}};
  json mats = json::object();
  json layers = json::array();
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const Layer& l = stack.layer(i);
    // Layers may carry distinct materials under one name (e.g. after
    // calibration); disambiguate so the table stays a function of name.
    std::string key = l.material.name;
    if (mats.contains(key) && material_to_json(l.material) != mats[key]) {
      key += "#" + std::to_string(i);
    }
    mats[key] = material_to_json(l.material);
    json lj = {{"material", key}, {"role", std::string(to_string(l.role))}};
    if (auto nm = m_to_nm(l.thickness)) {
      lj["thickness_nm"] = *nm;
    } else {
      lj["thickness_m"] = l.thickness;
    }
    layers.push_back(std::move(lj));
  }
  root["materials"] = std::move(mats);
  root["layers"] = std::move(layers);
  return root.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bawkit
