#include "goddard/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace goddard::io {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

void dump_rec(const json& j, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  const std::string pad2(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad2 + json(it.key()).dump() + ": ";
        dump_rec(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad2;
        dump_rec(v, out, indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += fmt_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

std::vector<double> vec_to_array(const Vec3& v) {
  return {v.x(), v.y(), v.z()};
}

Vec3 array_to_vec(const json& a) {
  if (!a.is_array() || a.size() != 3)
    throw ConfigError("expected a 3-element array");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

std::string mode_name(ControlMode m) {
  switch (m) {
    case ControlMode::Bang: return "Bang";
    case ControlMode::Regularized: return "Regularized";
    case ControlMode::Singular: return "Singular";
    case ControlMode::MaxThrust: return "MaxThrust";
    case ControlMode::NullThrust: return "NullThrust";
  }
  throw ConfigError("unknown control mode");
}

ControlMode mode_from_name(const std::string& s) {
  if (s == "Bang") return ControlMode::Bang;
  if (s == "Regularized") return ControlMode::Regularized;
  if (s == "Singular") return ControlMode::Singular;
  if (s == "MaxThrust") return ControlMode::MaxThrust;
  if (s == "NullThrust") return ControlMode::NullThrust;
  throw ConfigError("unknown control mode '" + s + "'");
}

}  // namespace

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::IndirectFull: return "IndirectFull";
    case Pipeline::IndirectShootOnly: return "IndirectShootOnly";
    case Pipeline::Direct: return "Direct";
    case Pipeline::OnOff: return "OnOff";
    case Pipeline::Compare: return "Compare";
  }
  throw ConfigError("unknown pipeline");
}

Pipeline pipeline_from_string(const std::string& s) {
  if (s == "IndirectFull") return Pipeline::IndirectFull;
  if (s == "IndirectShootOnly") return Pipeline::IndirectShootOnly;
  if (s == "Direct") return Pipeline::Direct;
  if (s == "OnOff") return Pipeline::OnOff;
  if (s == "Compare") return Pipeline::Compare;
  throw ConfigError("unknown pipeline '" + s + "'");
}

std::string canonical_dump(const json& j) {
  std::string out;
  dump_rec(j, out, 0);
  out += "\n";
  return out;
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    // nlohmann reports line and column in what()
    throw ConfigError(path + ": " + e.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << text;
  }
  std::filesystem::rename(tmp, path);
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["model"] = {{"C", cfg.model.C},       {"b", cfg.model.b},
                {"g0", cfg.model.g0},     {"K_D", cfg.model.K_D},
                {"k", cfg.model.k},       {"theta", cfg.model.theta},
                {"lambda", cfg.model.lambda}};
  j["boundary"] = {{"r0", vec_to_array(cfg.boundary.r0)},
                   {"v0", vec_to_array(cfg.boundary.v0)},
                   {"m0", cfg.boundary.m0},
                   {"rf", vec_to_array(cfg.boundary.rf)}};
  j["pipeline"] = to_string(cfg.pipeline);
  json arcs = json::array();
  for (auto m : cfg.structure.arcs) arcs.push_back(mode_name(m));
  j["structure"] = {
      {"arcs", arcs},
      {"switching_placement",
       cfg.structure.switching_placement == SwitchingPlacement::StartPsiPsiDot
           ? "StartPsiPsiDot"
           : "BothEndsPsi"}};
  j["homotopy"] = {{"atmosphere_delta", cfg.homotopy.atmosphere_delta},
                   {"main_delta", cfg.homotopy.main_delta},
                   {"main_target", cfg.homotopy.main_target},
                   {"budget", cfg.homotopy.budget},
                   {"label_euler_steps", cfg.homotopy.label_euler_steps}};
  j["integrator"] = {{"abs_tol", cfg.integrator.abs_tol},
                     {"rel_tol", cfg.integrator.rel_tol}};
  j["output_dir"] = cfg.output_dir;
  j["direct_nodes"] = cfg.direct_nodes;
  j["onoff_nodes"] = cfg.onoff_nodes;
  j["seed"] = cfg.seed;
  if (!cfg.z0.empty()) j["z0"] = cfg.z0;
  if (!cfg.compare_inputs.empty()) j["compare_inputs"] = cfg.compare_inputs;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  try {
    if (j.contains("model")) {
      const auto& m = j["model"];
      cfg.model.C = m.value("C", cfg.model.C);
      cfg.model.b = m.value("b", cfg.model.b);
      cfg.model.g0 = m.value("g0", cfg.model.g0);
      cfg.model.K_D = m.value("K_D", cfg.model.K_D);
      cfg.model.k = m.value("k", cfg.model.k);
      cfg.model.theta = m.value("theta", cfg.model.theta);
      cfg.model.lambda = m.value("lambda", cfg.model.lambda);
    }
    if (j.contains("boundary")) {
      const auto& b = j["boundary"];
      if (b.contains("r0")) cfg.boundary.r0 = array_to_vec(b["r0"]);
      if (b.contains("v0")) cfg.boundary.v0 = array_to_vec(b["v0"]);
      cfg.boundary.m0 = b.value("m0", cfg.boundary.m0);
      if (b.contains("rf")) cfg.boundary.rf = array_to_vec(b["rf"]);
    }
    if (j.contains("pipeline"))
      cfg.pipeline = pipeline_from_string(j["pipeline"].get<std::string>());
    if (j.contains("structure")) {
      const auto& s = j["structure"];
      if (s.contains("arcs")) {
        cfg.structure.arcs.clear();
        for (const auto& a : s["arcs"])
          cfg.structure.arcs.push_back(mode_from_name(a.get<std::string>()));
      }
      const std::string pl = s.value("switching_placement", "StartPsiPsiDot");
      if (pl == "StartPsiPsiDot")
        cfg.structure.switching_placement = SwitchingPlacement::StartPsiPsiDot;
      else if (pl == "BothEndsPsi")
        cfg.structure.switching_placement = SwitchingPlacement::BothEndsPsi;
      else
        throw ConfigError("unknown switching_placement '" + pl + "'");
    }
    if (j.contains("homotopy")) {
      const auto& h = j["homotopy"];
      cfg.homotopy.atmosphere_delta =
          h.value("atmosphere_delta", cfg.homotopy.atmosphere_delta);
      cfg.homotopy.main_delta = h.value("main_delta", cfg.homotopy.main_delta);
      cfg.homotopy.main_target =
          h.value("main_target", cfg.homotopy.main_target);
      cfg.homotopy.budget = h.value("budget", cfg.homotopy.budget);
      cfg.homotopy.label_euler_steps =
          h.value("label_euler_steps", cfg.homotopy.label_euler_steps);
    }
    if (j.contains("integrator")) {
      const auto& i = j["integrator"];
      cfg.integrator.abs_tol = i.value("abs_tol", cfg.integrator.abs_tol);
      cfg.integrator.rel_tol = i.value("rel_tol", cfg.integrator.rel_tol);
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.direct_nodes = j.value("direct_nodes", cfg.direct_nodes);
    cfg.onoff_nodes = j.value("onoff_nodes", cfg.onoff_nodes);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("z0")) cfg.z0 = j["z0"].get<std::vector<double>>();
    if (j.contains("compare_inputs"))
      cfg.compare_inputs =
          j["compare_inputs"].get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return config_from_json(load_json(path));
}

namespace {

json trace_to_json(const std::vector<TracePoint>& trace) {
  json t;
  auto& jt = t["t"] = json::array();
  auto& js = t["s"] = json::array();
  auto& jr = t["r"] = json::array();
  auto& jv = t["v"] = json::array();
  auto& jm = t["m"] = json::array();
  auto& jpr = t["p_r"] = json::array();
  auto& jpv = t["p_v"] = json::array();
  auto& jpm = t["p_m"] = json::array();
  auto& ju = t["u"] = json::array();
  auto& jun = t["u_norm"] = json::array();
  auto& jpsi = t["psi"] = json::array();
  auto& jh = t["H"] = json::array();
  auto& jar = t["arc"] = json::array();
  for (const auto& p : trace) {
    jt.push_back(p.t);
    js.push_back(p.s);
    jr.push_back(vec_to_array(p.e.x.r));
    jv.push_back(vec_to_array(p.e.x.v));
    jm.push_back(p.e.x.m);
    jpr.push_back(vec_to_array(p.e.p.p_r));
    jpv.push_back(vec_to_array(p.e.p.p_v));
    jpm.push_back(p.e.p.p_m);
    ju.push_back(vec_to_array(p.u));
    jun.push_back(p.u_norm);
    jpsi.push_back(p.psi);
    jh.push_back(p.H);
    jar.push_back(p.arc);
  }
  return t;
}

}  // namespace

json solution_document(const RunConfig& cfg, const Solution& s) {
  json d;
  d["schema_version"] = "1.0";
  d["kind"] = "indirect";
  d["config"] = config_to_json(cfg);
  d["t_f"] = s.t_f;
  d["objective"] = s.objective;
  d["final_mass"] = s.final_mass;
  d["switch_times"] = s.switch_times_physical;
  d["unknowns"] = std::vector<double>(s.unknowns.data(),
                                      s.unknowns.data() + s.unknowns.size());
  d["trace"] = trace_to_json(s.trace);
  d["diagnostics"] = {
      {"residual_norm", s.newton_diag.residual_norm},
      {"iterations", s.newton_diag.iterations},
      {"condition_estimate", s.newton_diag.condition_estimate}};
  return d;
}

json solution_document(const RunConfig& cfg, const direct::DirectSolution& s,
                       bool onoff) {
  json d;
  d["schema_version"] = "1.0";
  d["kind"] = onoff ? "onoff" : "direct";
  d["config"] = config_to_json(cfg);
  d["t_f"] = s.t_f;
  if (onoff) d["t_off"] = s.t_off;
  d["objective"] = s.objective;
  d["final_mass"] = s.final_mass;
  d["switch_times"] = onoff ? json::array({s.t_off}) : json::array();
  json t;
  auto& jt = t["t"] = json::array();
  auto& jr = t["r"] = json::array();
  auto& jv = t["v"] = json::array();
  auto& jm = t["m"] = json::array();
  auto& ju = t["u"] = json::array();
  auto& jun = t["u_norm"] = json::array();
  const size_t n = s.t_grid.size();
  for (size_t i = 0; i < n; ++i) {
    jt.push_back(s.t_grid[i]);
    jr.push_back(vec_to_array(s.x[i].r));
    jv.push_back(vec_to_array(s.x[i].v));
    jm.push_back(s.x[i].m);
    const Vec3 u = s.u[std::min(i, s.u.size() - 1)];
    ju.push_back(vec_to_array(u));
    jun.push_back(u.norm());
  }
  d["trace"] = t;
  d["diagnostics"] = {{"constraint_norm", s.constraint_norm},
                      {"outer_iterations", s.outer_iterations},
                      {"inner_iterations", s.inner_iterations},
                      {"seed_used", s.seed_used}};
  return d;
}

namespace {

json profile_to_json(const direct::ControlProfile& p) {
  return {{"t", p.t},
          {"u_norm", p.u_norm},
          {"t_f", p.t_f},
          {"objective", p.objective}};
}

}  // namespace

json comparison_document(const RunConfig& cfg,
                         const direct::ComparisonReport& rep,
                         const direct::ControlProfile& indirect,
                         const direct::ControlProfile& dir,
                         const direct::ControlProfile& onoff) {
  json d;
  d["schema_version"] = "1.0";
  d["kind"] = "compare";
  d["config"] = config_to_json(cfg);
  d["report"] = {
      {"obj_direct_minus_indirect", rep.obj_direct_minus_indirect},
      {"obj_onoff_minus_indirect", rep.obj_onoff_minus_indirect},
      {"tf_direct_minus_indirect", rep.tf_direct_minus_indirect},
      {"tf_onoff_minus_indirect", rep.tf_onoff_minus_indirect},
      {"supnorm_direct_indirect", rep.supnorm_direct_indirect},
      {"supnorm_onoff_indirect", rep.supnorm_onoff_indirect},
      {"grid_points", rep.grid_points}};
  d["profiles"] = {{"indirect", profile_to_json(indirect)},
                   {"direct", profile_to_json(dir)},
                   {"onoff", profile_to_json(onoff)}};
  return d;
}

void validate_solution_document(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version") ||
      !doc["schema_version"].is_string())
    throw SchemaMismatch("solution document: missing schema_version");
  if (doc["schema_version"].get<std::string>() != "1.0")
    throw SchemaMismatch("solution document: unsupported schema version");
  if (doc.contains("trace")) {
    const auto& t = doc["trace"];
    if (!t.is_object() || !t.contains("t"))
      throw SchemaMismatch("solution document: malformed trace");
    const size_t n = t["t"].size();
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!it.value().is_array() || it.value().size() != n)
        throw SchemaMismatch("solution document: trace array '" + it.key() +
                             "' length mismatch");
    }
  }
}

direct::ControlProfile profile_from_document(const json& doc) {
  validate_solution_document(doc);
  if (!doc.contains("trace"))
    throw SchemaMismatch("solution document: no trace for control profile");
  direct::ControlProfile p;
  p.t = doc["trace"]["t"].get<std::vector<double>>();
  p.u_norm = doc["trace"]["u_norm"].get<std::vector<double>>();
  p.t_f = doc.value("t_f", p.t.empty() ? 0.0 : p.t.back());
  p.objective = doc.value("objective", 0.0);
  return p;
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_svg_plot(const std::string& title,
                            const std::vector<Series>& series) {
  const double W = 800, H = 600;
  const double L = 70, R = 20, T = 45, B = 55;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmax - xmin < 1e-300) xmax = xmin + 1;
  if (ymax - ymin < 1e-300) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "width=\"800\" height=\"600\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + fmt2(L) + "\" y1=\"" + fmt2(H - B) + "\" x2=\"" +
         fmt2(W - R) + "\" y2=\"" + fmt2(H - B) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt2(L) + "\" y1=\"" + fmt2(T) + "\" x2=\"" + fmt2(L) +
         "\" y2=\"" + fmt2(H - B) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    svg += "<line x1=\"" + fmt2(px(xv)) + "\" y1=\"" + fmt2(H - B) + "\" x2=\"" +
           fmt2(px(xv)) + "\" y2=\"" + fmt2(H - B + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(px(xv)) + "\" y=\"" + fmt2(H - B + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt_tick(xv) + "</text>\n";
    svg += "<line x1=\"" + fmt2(L - 5) + "\" y1=\"" + fmt2(py(yv)) + "\" x2=\"" +
           fmt2(L) + "\" y2=\"" + fmt2(py(yv)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(L - 8) + "\" y=\"" + fmt2(py(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt_tick(yv) + "</text>\n";
  }
  // one polyline per series
  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % 6];
    std::string pts;
    for (size_t i = 0; i < series[k].x.size(); ++i) {
      pts += fmt2(px(series[k].x[i])) + "," + fmt2(py(series[k].y[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    svg += "<text x=\"" + fmt2(W - R - 10) + "\" y=\"" +
           fmt2(T + 18.0 * (k + 1)) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"" + color + "\">" + series[k].name + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_csv(const std::vector<Series>& series) {
  if (series.empty()) return "";
  bool shared_x = true;
  for (const auto& s : series)
    if (s.x != series.front().x) shared_x = false;
  std::string out;
  if (shared_x) {
    out = "t";
    for (const auto& s : series) out += "," + s.name;
    out += "\n";
    for (size_t i = 0; i < series.front().x.size(); ++i) {
      out += fmt_double(series.front().x[i]);
      for (const auto& s : series) out += "," + fmt_double(s.y[i]);
      out += "\n";
    }
  } else {
    size_t rows = 0;
    for (size_t k = 0; k < series.size(); ++k) {
      if (k) out += ",";
      out += series[k].name + "_t," + series[k].name;
      rows = std::max(rows, series[k].x.size());
    }
    out += "\n";
    for (size_t i = 0; i < rows; ++i) {
      for (size_t k = 0; k < series.size(); ++k) {
        if (k) out += ",";
        if (i < series[k].x.size())
          out += fmt_double(series[k].x[i]) + "," + fmt_double(series[k].y[i]);
        else
          out += ",";
      }
      out += "\n";
    }
  }
  return out;
}

std::vector<std::string> emit_plots(const std::string& solution_path,
                                    const std::string& kind) {
  const json doc = load_json(solution_path);
  validate_solution_document(doc);
  std::string stem = solution_path;
  if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json")
    stem = stem.substr(0, stem.size() - 5);

  std::vector<Series> series;
  std::string title;
  if (kind == "state") {
    if (!doc.contains("trace"))
      throw SchemaMismatch("emit_plots: document has no trace");
    const auto& tr = doc["trace"];
    const auto t = tr["t"].get<std::vector<double>>();
    Series alt{"altitude", t, {}}, spd{"speed", t, {}}, mass{"mass", t, {}};
    for (size_t i = 0; i < t.size(); ++i) {
      alt.y.push_back(array_to_vec(tr["r"][i]).norm() - 1.0);
      spd.y.push_back(array_to_vec(tr["v"][i]).norm());
      mass.y.push_back(tr["m"][i].get<double>());
    }
    series = {alt, spd, mass};
    title = "altitude / speed / mass vs time";
  } else if (kind == "control") {
    if (!doc.contains("trace"))
      throw SchemaMismatch("emit_plots: document has no trace");
    const auto& tr = doc["trace"];
    const auto t = tr["t"].get<std::vector<double>>();
    Series ux{"u_x", t, {}}, uy{"u_y", t, {}}, uz{"u_z", t, {}},
        un{"u_norm", t, {}};
    for (size_t i = 0; i < t.size(); ++i) {
      const Vec3 u = array_to_vec(tr["u"][i]);
      ux.y.push_back(u.x());
      uy.y.push_back(u.y());
      uz.y.push_back(u.z());
      un.y.push_back(tr["u_norm"][i].get<double>());
    }
    series = {ux, uy, uz, un};
    title = "control components and norm vs time";
  } else if (kind == "switching") {
    if (!doc.contains("trace") || !doc["trace"].contains("psi"))
      throw SchemaMismatch("emit_plots: document has no switching trace");
    const auto& tr = doc["trace"];
    Series psi{"psi", tr["t"].get<std::vector<double>>(),
               tr["psi"].get<std::vector<double>>()};
    series = {psi};
    title = "switching function vs time";
  } else if (kind == "path") {
    if (!doc.contains("homotopy_path"))
      throw SchemaMismatch("emit_plots: document has no homotopy path");
    const auto& hp = doc["homotopy_path"];
    const auto level = hp["level"].get<std::vector<double>>();
    const auto& z = hp["z"];
    const size_t nz = z.empty() ? 0 : z[0].size();
    for (size_t c = 0; c < nz; ++c) {
      Series s{"z_" + std::to_string(c + 1), level, {}};
      for (size_t i = 0; i < level.size(); ++i)
        s.y.push_back(z[i][c].get<double>());
      series.push_back(std::move(s));
    }
    title = "homotopy path projection";
  } else if (kind == "compare") {
    if (!doc.contains("profiles"))
      throw SchemaMismatch("emit_plots: document has no comparison profiles");
    for (const char* name : {"indirect", "direct", "onoff"}) {
      const auto& p = doc["profiles"][name];
      series.push_back(Series{name, p["t"].get<std::vector<double>>(),
                              p["u_norm"].get<std::vector<double>>()});
    }
    title = "control norm comparison";
  } else {
    throw ConfigError("emit_plots: unknown kind '" + kind + "'");
  }

  const std::string csv_path = stem + "_" + kind + ".csv";
  const std::string svg_path = stem + "_" + kind + ".svg";
  write_text_atomic(csv_path, render_csv(series));
  write_text_atomic(svg_path, render_svg_plot(title, series));
  return {csv_path, svg_path};
}

}  // namespace goddard::io
