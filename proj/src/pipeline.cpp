#include <cmath>
#include "goddard/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <nlohmann/json.hpp>

namespace goddard::pipeline {

namespace {

namespace fs = std::filesystem;
using io::RunConfig;
using nlohmann::json;
using Eigen::VectorXd;

odeint::IvpOptions label_integrator(const RunConfig& cfg) {
  odeint::IvpOptions o;
  o.method = odeint::Method::Euler;
  o.steps = cfg.homotopy.label_euler_steps;
  return o;
}

odeint::IvpOptions fine_integrator(const RunConfig& cfg) {
  odeint::IvpOptions o;
  o.method = odeint::Method::AdaptiveRK;
  o.abs_tol = cfg.integrator.abs_tol;
  o.rel_tol = cfg.integrator.rel_tol;
  return o;
}

/// Shooting residual of the single regularized arc, on the rough labeling
/// integrator, at the given homotopy scalars.
std::function<VectorXd(const VectorXd&)> label_residual(const RunConfig& cfg,
                                                        double theta,
                                                        double lambda) {
  ModelParams p = cfg.model;
  p.theta = theta;
  p.lambda = lambda;
  ArcStructure reg;
  reg.arcs = {ControlMode::Regularized};
  const odeint::IvpOptions integ = label_integrator(cfg);
  const BoundaryConditions bc = cfg.boundary;
  return [p, reg, integ, bc](const VectorXd& z) {
    return shooting_residual(z, reg, CostConvention::MinFuel, p, bc, integ);
  };
}

/// Plain parameter continuation used as a fallback when a piecewise-
/// linear walk stops early: Newton-corrects a chain of intermediate
/// levels between from and to.
VectorXd continuation_fallback(
    const std::function<std::function<VectorXd(const VectorXd&)>(double)>& at,
    VectorXd z, double from, double to, int steps,
    const NewtonOptions& opts) {
  for (int i = 1; i <= steps; ++i) {
    const double v = from + (to - from) * i / steps;
    z = newton_solve(at(v), z, opts);
  }
  return z;
}

void append_path(std::vector<simplicial::PathPoint>& dst,
                 const std::vector<simplicial::PathPoint>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

simplicial::Triangulation centered_triangulation(const VectorXd& z,
                                                 const VectorXd& dz,
                                                 double delta_level, double lo,
                                                 double hi) {
  // Staggered fractional parts keep z strictly interior to a single
  // simplex; the symmetric choice z - dz/2 would park it on the cube
  // diagonal, where every containing facet is degenerate.
  const int n = static_cast<int>(z.size());
  VectorXd off(n);
  for (int c = 0; c < n; ++c)
    off(c) = z(c) - dz(c) * (0.25 + 0.5 * (c + 1) / (n + 1));
  return simplicial::Triangulation::make(dz, delta_level, lo, hi, off);
}

struct WalkOutcome {
  VectorXd z;
  double level = 0.0;
  std::vector<simplicial::PathPoint> path;
  std::int64_t simplices = 0;
};

/// Chunked piecewise-linear walk from (z, lo) toward the target level.
/// The slab is split into short chunks; each chunk walks a triangulation
/// centered and left-preconditioned at a Newton-corrected anchor. Short
/// chunks matter: far from its anchor the PL path tends to fold back on
/// itself, and re-anchoring keeps the walk in the cheap regime. On a
/// stalled chunk the verified progress is kept and the unknown meshsize
/// is halved (the level spacing never changes); successful chunks let it
/// grow back toward dz0.
WalkOutcome chunked_walk(
    const simplicial::HomotopyProblem& hp,
    const std::function<std::function<VectorXd(const VectorXd&)>(double)>& at,
    VectorXd z, double lo, double target, double dlevel, double dz0,
    int chunk_levels, std::int64_t budget, const NewtonOptions& newton) {
  WalkOutcome out;
  out.level = lo;
  double dz = dz0;
  int fails = 0;
  while (out.level < target - 1e-12 && fails <= 8 && out.simplices < budget) {
    const long long nlev = std::max<long long>(
        1, std::min<long long>(chunk_levels,
                               std::llround((target - out.level) / dlevel)));
    const double hi = out.level + dlevel * nlev;
    bool ok = false;
    try {
      const auto tri = centered_triangulation(
          z, VectorXd::Constant(z.size(), dz), dlevel, out.level, hi);
      const auto hpp = simplicial::preconditioned(hp, z, out.level);
      simplicial::FollowOptions fo;
      fo.budget = std::min<std::int64_t>(150'000, budget - out.simplices);
      fo.trace_stride = 1000;
      const auto res = simplicial::follow_path(hpp, z, tri, fo);
      out.simplices += res.simplices_visited;
      append_path(out.path, res.trace);
      // adopt the endpoint only when Newton confirms it lies on the path
      const double adopt =
          res.status == simplicial::PathStatus::ReachedTarget
              ? hi
              : dlevel * std::floor(res.level_end / dlevel + 1e-9);
      if (adopt > out.level + dlevel / 2) {
        try {
          z = newton_solve(at(adopt), res.z_end, newton);
          out.level = adopt;
          ok = true;
        } catch (const std::exception&) {
        }
      }
    } catch (const std::exception&) {
      // singular preconditioner or a label blow-up: retry on a finer mesh
    }
    if (ok) {
      fails = 0;
      dz = std::min(dz0, 2.0 * dz);
    } else {
      ++fails;
      dz *= 0.5;
    }
  }
  out.z = std::move(z);
  return out;
}

std::string fmtd(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

void write_trace_csv(const std::string& path,
                     const std::vector<TracePoint>& trace) {
  std::string out =
      "t,s,r_x,r_y,r_z,v_x,v_y,v_z,m,p_r_x,p_r_y,p_r_z,p_v_x,p_v_y,p_v_z,"
      "p_m,u_x,u_y,u_z,u_norm,psi,H,arc\n";
  for (const auto& p : trace) {
    out += fmtd(p.t) + "," + fmtd(p.s);
    for (int i = 0; i < 3; ++i) out += "," + fmtd(p.e.x.r(i));
    for (int i = 0; i < 3; ++i) out += "," + fmtd(p.e.x.v(i));
    out += "," + fmtd(p.e.x.m);
    for (int i = 0; i < 3; ++i) out += "," + fmtd(p.e.p.p_r(i));
    for (int i = 0; i < 3; ++i) out += "," + fmtd(p.e.p.p_v(i));
    out += "," + fmtd(p.e.p.p_m);
    for (int i = 0; i < 3; ++i) out += "," + fmtd(p.u(i));
    out += "," + fmtd(p.u_norm) + "," + fmtd(p.psi) + "," + fmtd(p.H) + "," +
           std::to_string(p.arc) + "\n";
  }
  io::write_text_atomic(path, out);
}

void write_control_table_csv(const std::string& path,
                             const direct::DirectSolution& s) {
  std::string out = "t,u_x,u_y,u_z,u_norm\n";
  for (size_t i = 0; i < s.u.size(); ++i) {
    out += fmtd(s.t_grid[i]);
    for (int c = 0; c < 3; ++c) out += "," + fmtd(s.u[i](c));
    out += "," + fmtd(s.u[i].norm()) + "\n";
  }
  io::write_text_atomic(path, out);
}

json path_to_json(const std::vector<simplicial::PathPoint>& path,
                  size_t max_points = 500) {
  json out;
  auto& lvl = out["level"] = json::array();
  auto& z = out["z"] = json::array();
  const size_t stride = std::max<size_t>(1, path.size() / max_points);
  for (size_t i = 0; i < path.size(); i += stride) {
    lvl.push_back(path[i].level);
    std::vector<double> zz(path[i].z.data(),
                           path[i].z.data() + path[i].z.size());
    z.push_back(zz);
  }
  if (!path.empty() && (path.size() - 1) % stride != 0) {
    lvl.push_back(path.back().level);
    std::vector<double> zz(path.back().z.data(),
                           path.back().z.data() + path.back().z.size());
    z.push_back(zz);
  }
  return out;
}

direct::DirectOptions direct_options(const RunConfig& cfg) {
  direct::DirectOptions o;
  o.rng_seed = cfg.seed;
  return o;
}

}  // namespace

IndirectFullResult indirect_full(const RunConfig& cfg) {
  IndirectFullResult out;
  const auto tick0 = std::chrono::steady_clock::now();
  auto tick = [&, last = tick0](const char* what) mutable {
    const auto now = std::chrono::steady_clock::now();
    if (std::getenv("GODDARD_DEBUG"))
      std::fprintf(stderr, "[indirect_full] %s: %.1fs\n", what,
                   std::chrono::duration<double>(now - last).count());
    last = now;
  };
  const BoundaryConditions bc = cfg.boundary;

  NewtonOptions rough;
  rough.tol = 1e-10;
  rough.max_iter = 200;

  // 1. vacuum, fully regularized problem from the trivial guess. The
  // all-equal starting point sits in a thrust-off region where the
  // shooting map is insensitive to most unknowns, so a short
  // deterministic ladder of rescaled variants backs it up.
  VectorXd z;
  {
    const auto F0 = label_residual(cfg, 0.0, 0.0);
    std::vector<VectorXd> seeds;
    VectorXd s(8);
    s << 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.2;
    seeds.push_back(s);
    s << 0.1, 0.1, 0.1, 0.4, 0.4, 0.4, 0.0, 0.1;
    seeds.push_back(s);
    s << 0.1, 0.1, 0.1, 0.2, 0.2, 0.2, -0.1, 0.3;
    seeds.push_back(s);
    s << 0.1, 0.1, 0.1, 0.8, 0.8, 0.8, -0.2, 0.15;
    seeds.push_back(s);
    bool ok = false;
    std::exception_ptr last;
    for (const auto& seed : seeds) {
      try {
        z = newton_solve(F0, seed, rough);
        ok = true;
        break;
      } catch (const std::exception&) {
        last = std::current_exception();
      }
    }
    if (!ok) std::rethrow_exception(last);
  }

  tick("stage 1 vacuum seed");

  // 2. piecewise-linear walk on the drag scale up to the full atmosphere
  {
    const auto hp =
        simplicial::atmosphere_homotopy(cfg.model, bc,
                                        cfg.homotopy.label_euler_steps);
    const auto at = [&](double th) { return label_residual(cfg, th, 0.0); };
    auto walk = chunked_walk(hp, at, z, 0.0, 1.0,
                             cfg.homotopy.atmosphere_delta,
                             cfg.homotopy.atmosphere_delta, 10,
                             cfg.homotopy.budget, rough);
    out.atmosphere_path = std::move(walk.path);
    out.atmosphere_simplices = walk.simplices;
    try {
      z = newton_solve(at(1.0), walk.z, rough);
    } catch (const std::exception&) {
      // walk stalled short of full atmosphere: bridge the rest by plain
      // parameter continuation
      z = continuation_fallback(at, walk.z, walk.level, 1.0, 20, rough);
    }
  }

  tick("stage 2 atmosphere walk");

  // 3. piecewise-linear walk on the cost regularization to the handover
  const double target = cfg.homotopy.main_target;
  {
    const auto hp = simplicial::main_homotopy(
        cfg.model, bc, target, cfg.homotopy.label_euler_steps);
    const auto at = [&](double lm) { return label_residual(cfg, 1.0, lm); };
    auto walk = chunked_walk(hp, at, z, 0.0, target, cfg.homotopy.main_delta,
                             2e-3, 100, cfg.homotopy.budget, rough);
    out.main_path = std::move(walk.path);
    out.main_simplices = walk.simplices;
    try {
      z = newton_solve(at(target), walk.z, rough);
    } catch (const std::exception&) {
      z = continuation_fallback(at, walk.z, walk.level, target, 16, rough);
    }
  }

  tick("stage 3 main walk");

  // 4. trace the handover solution's control-norm profile to locate the
  // switching structure. The regularized extremal at the handover level
  // exists only on the rough labeling integrator (accurate integration
  // from the same unknowns burns the whole mass before the final time),
  // so polish on the adaptive integrator is attempted but optional.
  ModelParams p_reg = cfg.model;
  p_reg.theta = 1.0;
  p_reg.lambda = target;
  ArcStructure reg;
  reg.arcs = {ControlMode::Regularized};
  const odeint::IvpOptions fine = fine_integrator(cfg);
  NewtonOptions polish = rough;
  polish.tol = 1e-8;
  try {
    z = newton_solve(
        [&](const VectorXd& y) {
          return shooting_residual(y, reg, CostConvention::MinFuel, p_reg, bc,
                                   fine);
        },
        z, polish);
  } catch (const std::exception&) {
    // the rough solution still seeds the structured shoot
  }
  out.z_regularized = z;

  std::vector<TracePoint> reg_trace;
  try {
    reg_trace = trace_solution(z, reg, CostConvention::MinFuel, p_reg, bc,
                               fine);
  } catch (const std::exception&) {
    reg_trace = trace_solution(z, reg, CostConvention::MinFuel, p_reg, bc,
                               label_integrator(cfg));
  }
  double s1 = 0.0, s2 = 0.0;
  for (const auto& tp : reg_trace) {
    if (s1 == 0.0 && tp.u_norm < 0.995 && tp.s > 1e-3) s1 = tp.s;
    if (s1 > 0.0 && s2 == 0.0 && tp.u_norm < 1e-2) s2 = tp.s;
  }
  if (!(s1 > 0.0 && s2 > s1)) {
    s1 = 0.15;  // conservative seeds when the profile has no clear knees
    s2 = 0.5;
  }
  out.t1 = s1;
  out.t2 = s2;

  tick("stage 4 structure extraction");

  // 5. structured three-arc shoot on the exact minimum-fuel problem
  ArcStructure st = cfg.structure;
  if (st.arcs.size() < 2)
    st.arcs = {ControlMode::MaxThrust, ControlMode::Singular,
               ControlMode::NullThrust};
  if (!st.valid())
    throw SolveError("indirect_full: target arc structure is not well posed");
  ModelParams p_final = cfg.model;
  p_final.theta = 1.0;
  p_final.lambda = 1.0;

  VectorXd zf(st.unknown_dim());
  zf.head(8) = z.head(8);
  if (st.n_switch() == 2) {
    zf(8) = s1;
    zf(9) = s2;
  } else {
    for (int i = 0; i < st.n_switch(); ++i)
      zf(8 + i) = (i + 1.0) / (st.n_switch() + 1.0);
  }

  // The structured shoot converges from a wide range of switching-time
  // seeds, but the Newton basin of the adaptive-integrator residual is
  // fractal at fine scales in the eight continuous unknowns. A fixed-step
  // RK4 pre-solve is cheap, much better behaved, and lands close enough
  // that the adaptive polish converges in a handful of iterations; a
  // short ladder of deterministically jittered seeds backs it up.
  odeint::IvpOptions rk4;
  rk4.method = odeint::Method::RK4;
  rk4.steps = 100;
  NewtonOptions pre_opts;
  pre_opts.tol = 1e-8;
  pre_opts.max_iter = 300;
  NewtonOptions final_opts;
  final_opts.tol = 1e-6;
  final_opts.max_iter = 200;
  std::exception_ptr last;
  bool solved = false;
  std::mt19937 jitter_rng(20260824);
  std::normal_distribution<double> jitter(0.0, 1.0);
  for (int attempt = 0; attempt < 6 && !solved; ++attempt) {
    VectorXd zs = zf;
    if (attempt > 0) {
      for (int i = 0; i < 8; ++i) zs(i) += 1e-5 * jitter(jitter_rng);
      for (int i = 8; i < zs.size(); ++i) zs(i) += 1e-3 * jitter(jitter_rng);
    }
    try {
      zs = newton_solve(
          [&](const VectorXd& y) {
            return shooting_residual(y, st, CostConvention::MinFuel, p_final,
                                     bc, rk4);
          },
          zs, pre_opts);
      out.solution = solve_indirect(st, CostConvention::MinFuel, p_final, bc,
                                    zs, final_opts, fine);
      solved = true;
    } catch (const std::exception&) {
      last = std::current_exception();
    }
  }
  if (!solved) std::rethrow_exception(last);
  tick("stage 5 structured shoot");
  return out;
}

RunArtifacts run(const RunConfig& cfg, bool emit_figures) {
  RunArtifacts art;
  fs::create_directories(cfg.output_dir);
  const std::string sol_path =
      (fs::path(cfg.output_dir) / "solution.json").string();
  std::vector<std::string> plot_kinds;

  switch (cfg.pipeline) {
    case io::Pipeline::IndirectFull: {
      const auto r = indirect_full(cfg);
      art.document = io::solution_document(cfg, r.solution);
      art.document["homotopy_path"] =
          path_to_json(r.main_path.empty() ? r.atmosphere_path : r.main_path);
      const std::string tr =
          (fs::path(cfg.output_dir) / "trace.csv").string();
      write_trace_csv(tr, r.solution.trace);
      art.files_written.push_back(tr);
      const std::string pa =
          (fs::path(cfg.output_dir) / "path_atmosphere.csv").string();
      simplicial::write_path_trace_csv(r.atmosphere_path, pa);
      art.files_written.push_back(pa);
      const std::string pm =
          (fs::path(cfg.output_dir) / "path_main.csv").string();
      simplicial::write_path_trace_csv(r.main_path, pm);
      art.files_written.push_back(pm);
      plot_kinds = {"state", "control", "switching", "path"};
      break;
    }
    case io::Pipeline::IndirectShootOnly: {
      ArcStructure st = cfg.structure;
      if (static_cast<int>(cfg.z0.size()) != st.unknown_dim())
        throw io::ConfigError(
            "IndirectShootOnly: config field z0 must have " +
            std::to_string(st.unknown_dim()) + " entries");
      VectorXd z0 = Eigen::Map<const VectorXd>(cfg.z0.data(), cfg.z0.size());
      const auto sol =
          solve_indirect(st, CostConvention::MinFuel, cfg.model, cfg.boundary,
                         z0, NewtonOptions{}, fine_integrator(cfg));
      art.document = io::solution_document(cfg, sol);
      const std::string tr =
          (fs::path(cfg.output_dir) / "trace.csv").string();
      write_trace_csv(tr, sol.trace);
      art.files_written.push_back(tr);
      plot_kinds = {"state", "control", "switching"};
      break;
    }
    case io::Pipeline::Direct: {
      const auto sol =
          direct::solve_direct(cfg.direct_nodes, cfg.model, cfg.boundary,
                               direct_options(cfg));
      art.document = io::solution_document(cfg, sol, false);
      const std::string ct =
          (fs::path(cfg.output_dir) / "control_table.csv").string();
      write_control_table_csv(ct, sol);
      art.files_written.push_back(ct);
      plot_kinds = {"state", "control"};
      break;
    }
    case io::Pipeline::OnOff: {
      const auto sol = direct::solve_onoff(cfg.model, cfg.boundary,
                                           direct_options(cfg),
                                           cfg.onoff_nodes);
      art.document = io::solution_document(cfg, sol, true);
      const std::string ct =
          (fs::path(cfg.output_dir) / "control_table.csv").string();
      write_control_table_csv(ct, sol);
      art.files_written.push_back(ct);
      plot_kinds = {"state", "control"};
      break;
    }
    case io::Pipeline::Compare: {
      std::string missing;
      for (const char* key : {"indirect", "direct", "onoff"}) {
        const auto it = cfg.compare_inputs.find(key);
        if (it == cfg.compare_inputs.end() || !fs::exists(it->second)) {
          if (!missing.empty()) missing += ", ";
          missing += key;
          if (it != cfg.compare_inputs.end()) missing += " (" + it->second + ")";
        }
      }
      if (!missing.empty())
        throw io::ConfigError("Compare: missing input solutions: " + missing);
      const auto pi = io::profile_from_document(
          io::load_json(cfg.compare_inputs.at("indirect")));
      const auto pd = io::profile_from_document(
          io::load_json(cfg.compare_inputs.at("direct")));
      const auto po = io::profile_from_document(
          io::load_json(cfg.compare_inputs.at("onoff")));
      const auto rep = direct::compare(pi, pd, po);
      art.document = io::comparison_document(cfg, rep, pi, pd, po);
      plot_kinds = {"compare"};
      break;
    }
  }

  io::write_text_atomic(sol_path, io::canonical_dump(art.document));
  art.files_written.push_back(sol_path);
  if (emit_figures) {
    for (const auto& kind : plot_kinds) {
      const auto files = io::emit_plots(sol_path, kind);
      art.files_written.insert(art.files_written.end(), files.begin(),
                               files.end());
    }
  }
  return art;
}

}  // namespace goddard::pipeline
