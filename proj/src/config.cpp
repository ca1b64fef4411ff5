#include "eqsadj/config.hpp"

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

namespace eqsadj {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

// Tracks which keys of one JSON object were consumed; done() rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json& get(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) fail(path_, std::string("missing required key '") + key + "'");
    return *it;
  }
  const json* opt(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(path_, "unknown key '" + it.key() + "'");
  }
  std::string sub(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path, int size = -1) {
  if (!j.is_array()) fail(path, "expected an array");
  if (size >= 0 && static_cast<int>(j.size()) != size)
    fail(path, "expected an array of " + std::to_string(size) + " entries");
  return j;
}

MeshSource mesh_from_json(const json& j) {
  Obj o(j, "mesh");
  MeshSource ms;
  if (o.has("file")) {
    ms.kind = MeshSource::Kind::file;
    ms.path = as_str(o.get("file"), o.sub("file"));
    o.done();
    return ms;
  }
  const std::string builder = as_str(o.get("builder"), o.sub("builder"));
  if (builder == "layered_rect") {
    ms.kind = MeshSource::Kind::layered_rect;
    ms.width = as_num(o.get("width"), o.sub("width"));
    ms.layer_thickness = as_num(o.get("layer_thickness"), o.sub("layer_thickness"));
    ms.nx = as_int(o.get("nx"), o.sub("nx"));
    ms.ny_per_layer = as_int(o.get("ny_per_layer"), o.sub("ny_per_layer"));
  } else if (builder == "fgm_joint") {
    ms.kind = MeshSource::Kind::fgm_joint;
    FgmJointGeometry& g = ms.joint;
    g.r0 = as_num(o.get("r0"), o.sub("r0"));
    g.r1 = as_num(o.get("r1"), o.sub("r1"));
    g.r2 = as_num(o.get("r2"), o.sub("r2"));
    g.r3 = as_num(o.get("r3"), o.sub("r3"));
    g.length = as_num(o.get("length"), o.sub("length"));
    g.fgm_end = as_num(o.get("fgm_end"), o.sub("fgm_end"));
    g.cells_r_inner = as_int(o.get("cells_r_inner"), o.sub("cells_r_inner"));
    g.cells_r_fgm = as_int(o.get("cells_r_fgm"), o.sub("cells_r_fgm"));
    g.cells_r_outer = as_int(o.get("cells_r_outer"), o.sub("cells_r_outer"));
    g.cells_z_low = as_int(o.get("cells_z_low"), o.sub("cells_z_low"));
    g.cells_z_high = as_int(o.get("cells_z_high"), o.sub("cells_z_high"));
  } else {
    fail("mesh.builder", "unknown builder '" + builder +
                            "' (expected layered_rect or fgm_joint)");
  }
  o.done();
  return ms;
}

MaterialModel material_from_json(const json& j, const std::string& path) {
  Obj o(j, path);
  MaterialModel m;
  m.region = as_int(o.get("region"), o.sub("region"));
  const std::string kind = as_str(o.get("kind"), o.sub("kind"));
  if (kind == "linear") {
    m.kind = MaterialKind::linear;
    m.sigma = as_num(o.get("sigma"), o.sub("sigma"));
    m.eps = as_num(o.get("eps"), o.sub("eps"));
  } else if (kind == "fgm") {
    m.kind = MaterialKind::fgm;
    m.a1 = as_num(o.get("a1"), o.sub("a1"));
    m.a2 = as_num(o.get("a2"), o.sub("a2"));
    m.a3 = as_num(o.get("a3"), o.sub("a3"));
    m.a4 = as_num(o.get("a4"), o.sub("a4"));
    m.eps = as_num(o.get("eps"), o.sub("eps"));
  } else {
    fail(path + ".kind", "unknown material kind '" + kind + "'");
  }
  o.done();
  return m;
}

TimeFunction waveform_from_json(const json& j, const std::string& path) {
  Obj o(j, path);
  const std::string kind = as_str(o.get("kind"), o.sub("kind"));
  TimeFunction f;
  if (kind == "dc") {
    f = TimeFunction::dc(as_num(o.get("value"), o.sub("value")));
  } else if (kind == "sinusoid") {
    f = TimeFunction::sinusoid(as_num(o.get("amplitude"), o.sub("amplitude")),
                               as_num(o.get("omega"), o.sub("omega")));
  } else if (kind == "impulse") {
    const double u_hat = as_num(o.get("u_hat"), o.sub("u_hat"));
    const double tau1 = as_num(o.get("tau1"), o.sub("tau1"));
    const double tau2 = as_num(o.get("tau2"), o.sub("tau2"));
    double offset = 0.0;
    if (const json* d = o.opt("dc_offset")) offset = as_num(*d, o.sub("dc_offset"));
    try {
      f = TimeFunction::impulse(u_hat, tau1, tau2, offset);
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  } else {
    fail(path + ".kind", "unknown waveform kind '" + kind + "'");
  }
  o.done();
  return f;
}

QoiSpec qoi_from_json(const json& j, const std::string& path) {
  Obj o(j, path);
  QoiSpec q;
  q.name = as_str(o.get("name"), o.sub("name"));
  const std::string kind = as_str(o.get("kind"), o.sub("kind"));
  try {
    q.kind = parse_qoi_kind(kind);
  } catch (const std::invalid_argument& e) {
    fail(path + ".kind", e.what());
  }
  switch (q.kind) {
    case QoiKind::energy_integral: {
      const json& w = as_array(o.get("window"), o.sub("window"), 2);
      q.t_a = as_num(w[0], o.sub("window[0]"));
      q.t_b = as_num(w[1], o.sub("window[1]"));
      if (const json* r = o.opt("regions")) {
        const json& arr = as_array(*r, o.sub("regions"));
        for (size_t i = 0; i < arr.size(); ++i)
          q.regions.push_back(as_int(arr[i], o.sub("regions[" + std::to_string(i) + "]")));
      }
      break;
    }
    case QoiKind::pointwise_potential:
    case QoiKind::pointwise_field_magnitude: {
      const json& p = as_array(o.get("point"), o.sub("point"), 2);
      q.point.x() = as_num(p[0], o.sub("point[0]"));
      q.point.y() = as_num(p[1], o.sub("point[1]"));
      q.t_ref = as_num(o.get("t_ref"), o.sub("t_ref"));
      break;
    }
    case QoiKind::synthetic_quadratic:
      q.parameter = as_str(o.get("parameter"), o.sub("parameter"));
      break;
  }
  o.done();
  return q;
}

ParameterSpec parameter_from_json(const json& j, const std::string& path) {
  Obj o(j, path);
  ParameterSpec p;
  p.name = as_str(o.get("name"), o.sub("name"));
  p.region = as_int(o.get("region"), o.sub("region"));
  const std::string select = as_str(o.get("select"), o.sub("select"));
  try {
    p.select = parse_selector(select);
  } catch (const std::invalid_argument& e) {
    fail(path + ".select", e.what());
  }
  o.done();
  return p;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Obj o(j, "$");
  const int version = as_int(o.get("schema_version"), o.sub("schema_version"));
  if (version != config_schema_version)
    fail("$.schema_version", "unsupported version " + std::to_string(version) +
                                 " (this tool reads version " +
                                 std::to_string(config_schema_version) + ")");
  Scenario sc;
  sc.name = as_str(o.get("name"), o.sub("name"));
  sc.mesh_source = mesh_from_json(o.get("mesh"));

  {
    const json& arr = as_array(o.get("materials"), o.sub("materials"));
    for (size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "materials[" + std::to_string(i) + "]";
      MaterialModel m = material_from_json(arr[i], path);
      if (!sc.materials.emplace(m.region, m).second)
        fail(path, "duplicate region " + std::to_string(m.region));
    }
  }

  {
    const json& exc = o.get("excitation");
    if (!exc.is_object()) fail("excitation", "expected an object");
    for (auto it = exc.begin(); it != exc.end(); ++it)
      sc.excitation.markers[it.key()] =
          waveform_from_json(it.value(), "excitation." + it.key());
  }

  if (const json* ic = o.opt("initial_condition")) {
    const std::string s = as_str(*ic, o.sub("initial_condition"));
    if (s == "zero")
      sc.initial_condition = InitialConditionInfo::Kind::zero;
    else if (s == "dc_steady")
      sc.initial_condition = InitialConditionInfo::Kind::dc_steady;
    else
      fail("$.initial_condition", "expected 'zero' or 'dc_steady'");
  }

  {
    Obj t(o.get("timegrid"), "timegrid");
    sc.timegrid.T = as_num(t.get("T"), t.sub("T"));
    sc.timegrid.n_main = as_int(t.get("n_main"), t.sub("n_main"));
    if (const json* s = t.opt("sweep")) {
      const json& arr = as_array(*s, t.sub("sweep"));
      for (size_t i = 0; i < arr.size(); ++i)
        sc.timegrid.sweep.push_back(
            as_int(arr[i], t.sub("sweep[" + std::to_string(i) + "]")));
    }
    if (const json* r = t.opt("ratio"))
      sc.timegrid.ratio = as_num(*r, t.sub("ratio"));
    t.done();
  }

  {
    const json& arr = as_array(o.get("qois"), o.sub("qois"));
    for (size_t i = 0; i < arr.size(); ++i)
      sc.qois.push_back(qoi_from_json(arr[i], "qois[" + std::to_string(i) + "]"));
  }

  {
    const json& arr = as_array(o.get("parameters"), o.sub("parameters"));
    for (size_t i = 0; i < arr.size(); ++i)
      sc.parameters.push_back(
          parameter_from_json(arr[i], "parameters[" + std::to_string(i) + "]"));
  }

  if (const json* r = o.opt("run")) {
    Obj ro(*r, "run");
    if (const json* v = ro.opt("newton_tol"))
      sc.run.newton_tol = as_num(*v, ro.sub("newton_tol"));
    if (const json* v = ro.opt("max_newton"))
      sc.run.max_newton = as_int(*v, ro.sub("max_newton"));
    if (const json* v = ro.opt("fd_h_rel"))
      sc.run.fd_h_rel = as_num(*v, ro.sub("fd_h_rel"));
    if (const json* v = ro.opt("tolerance"))
      sc.run.tolerance = as_num(*v, ro.sub("tolerance"));
    ro.done();
  }

  if (const json* a = o.opt("analytic_oracle"))
    sc.analytic_oracle = as_bool(*a, o.sub("analytic_oracle"));

  o.done();
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["schema_version"] = config_schema_version;
  j["name"] = sc.name;

  json mesh;
  switch (sc.mesh_source.kind) {
    case MeshSource::Kind::layered_rect:
      mesh["builder"] = "layered_rect";
      mesh["width"] = sc.mesh_source.width;
      mesh["layer_thickness"] = sc.mesh_source.layer_thickness;
      mesh["nx"] = sc.mesh_source.nx;
      mesh["ny_per_layer"] = sc.mesh_source.ny_per_layer;
      break;
    case MeshSource::Kind::fgm_joint: {
      const FgmJointGeometry& g = sc.mesh_source.joint;
      mesh["builder"] = "fgm_joint";
      mesh["r0"] = g.r0;
      mesh["r1"] = g.r1;
      mesh["r2"] = g.r2;
      mesh["r3"] = g.r3;
      mesh["length"] = g.length;
      mesh["fgm_end"] = g.fgm_end;
      mesh["cells_r_inner"] = g.cells_r_inner;
      mesh["cells_r_fgm"] = g.cells_r_fgm;
      mesh["cells_r_outer"] = g.cells_r_outer;
      mesh["cells_z_low"] = g.cells_z_low;
      mesh["cells_z_high"] = g.cells_z_high;
      break;
    }
    case MeshSource::Kind::file:
      mesh["file"] = sc.mesh_source.path;
      break;
  }
  j["mesh"] = mesh;

  json materials = json::array();
  for (const auto& [region, m] : sc.materials) {
    json mj;
    mj["region"] = m.region;
    if (m.kind == MaterialKind::linear) {
      mj["kind"] = "linear";
      mj["sigma"] = m.sigma;
      mj["eps"] = m.eps;
    } else {
      mj["kind"] = "fgm";
      mj["a1"] = m.a1;
      mj["a2"] = m.a2;
      mj["a3"] = m.a3;
      mj["a4"] = m.a4;
      mj["eps"] = m.eps;
    }
    materials.push_back(mj);
  }
  j["materials"] = materials;

  json exc;
  for (const auto& [marker, f] : sc.excitation.markers) {
    json fj;
    switch (f.kind) {
      case TimeFunction::Kind::dc:
        fj["kind"] = "dc";
        fj["value"] = f.value;
        break;
      case TimeFunction::Kind::sinusoid:
        fj["kind"] = "sinusoid";
        fj["amplitude"] = f.amplitude;
        fj["omega"] = f.omega;
        break;
      case TimeFunction::Kind::impulse:
        fj["kind"] = "impulse";
        fj["u_hat"] = f.u_hat;
        fj["tau1"] = f.tau1;
        fj["tau2"] = f.tau2;
        fj["dc_offset"] = f.value;
        break;
    }
    exc[marker] = fj;
  }
  j["excitation"] = exc;

  j["initial_condition"] =
      sc.initial_condition == InitialConditionInfo::Kind::dc_steady ? "dc_steady"
                                                                    : "zero";

  json tg;
  tg["T"] = sc.timegrid.T;
  tg["n_main"] = sc.timegrid.n_main;
  if (!sc.timegrid.sweep.empty()) tg["sweep"] = sc.timegrid.sweep;
  tg["ratio"] = sc.timegrid.ratio;
  j["timegrid"] = tg;

  json qois = json::array();
  for (const QoiSpec& q : sc.qois) {
    json qj;
    qj["name"] = q.name;
    qj["kind"] = qoi_kind_name(q.kind);
    switch (q.kind) {
      case QoiKind::energy_integral:
        qj["window"] = {q.t_a, q.t_b};
        if (!q.regions.empty()) qj["regions"] = q.regions;
        break;
      case QoiKind::pointwise_potential:
      case QoiKind::pointwise_field_magnitude:
        qj["point"] = {q.point.x(), q.point.y()};
        qj["t_ref"] = q.t_ref;
        break;
      case QoiKind::synthetic_quadratic:
        qj["parameter"] = q.parameter;
        break;
    }
    qois.push_back(qj);
  }
  j["qois"] = qois;

  json params = json::array();
  for (const ParameterSpec& p : sc.parameters) {
    json pj;
    pj["name"] = p.name;
    pj["region"] = p.region;
    pj["select"] = selector_name(p.select);
    params.push_back(pj);
  }
  j["parameters"] = params;

  json run;
  run["newton_tol"] = sc.run.newton_tol;
  run["max_newton"] = sc.run.max_newton;
  run["fd_h_rel"] = sc.run.fd_h_rel;
  run["tolerance"] = sc.run.tolerance;
  j["run"] = run;

  j["analytic_oracle"] = sc.analytic_oracle;
  return j;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  Scenario sc = scenario_from_json(j);
  try {
    validate_scenario(sc);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write '" + path + "'");
  out << scenario_to_json(sc).dump(2) << "\n";
  if (!out) throw ConfigError("config: write to '" + path + "' failed");
}

std::string config_hash(const Scenario& sc) {
  const std::string canon = scenario_to_json(sc).dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;  // FNV prime
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return std::string(buf);
}

}  // namespace eqsadj
