#include "goddard/simplicial.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <unordered_set>

namespace goddard::simplicial {

namespace {

bool lex_positive_row(const Eigen::RowVectorXd& row) {
  const double tol = 1e-12 * std::max(1.0, row.cwiseAbs().maxCoeff());
  for (int i = 0; i < row.size(); ++i) {
    if (std::abs(row(i)) > tol) return row(i) > 0.0;
  }
  return false;
}

/// Lexicographic comparison of ratio rows a/wa vs b/wb without division
/// noise amplification: compares a*wb vs b*wa componentwise (wa, wb > 0).
bool lex_ratio_less(const Eigen::RowVectorXd& a, double wa,
                    const Eigen::RowVectorXd& b, double wb) {
  for (int i = 0; i < a.size(); ++i) {
    const double lhs = a(i) * wb;
    const double rhs = b(i) * wa;
    const double tol = 1e-12 * std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    if (lhs < rhs - tol) return true;
    if (lhs > rhs + tol) return false;
  }
  return false;
}

}  // namespace

Triangulation Triangulation::make(const VectorXd& delta_z, double delta_level,
                                  double level_lo, double level_hi,
                                  const VectorXd& offset_z) {
  const int n = static_cast<int>(delta_z.size());
  Triangulation t;
  t.delta.resize(n + 1);
  t.delta.head(n) = delta_z;
  t.delta(n) = delta_level;
  t.offset = VectorXd::Zero(n + 1);
  if (offset_z.size() == n) t.offset.head(n) = offset_z;
  t.offset(n) = level_lo;
  t.level_idx_lo = 0;
  const double span = (level_hi - level_lo) / delta_level;
  t.level_idx_hi = std::llround(span);
  if (std::abs(span - static_cast<double>(t.level_idx_hi)) > 1e-9 ||
      t.level_idx_hi < 1)
    throw std::invalid_argument(
        "Triangulation::make: slab bounds must be level-lattice aligned");
  return t;
}

std::vector<std::int64_t> Simplex::vertex_lattice(int i) const {
  std::vector<std::int64_t> v = base;
  for (int j = 0; j < i; ++j) v[perm[j]] += 1;
  return v;
}

VectorXd Simplex::vertex(int i, const Triangulation& t) const {
  const auto lat = vertex_lattice(i);
  VectorXd x(t.ambient_dim());
  for (int c = 0; c < t.ambient_dim(); ++c)
    x(c) = t.offset(c) + t.delta(c) * static_cast<double>(lat[c]);
  return x;
}

std::string Simplex::key() const {
  std::string k;
  k.reserve(base.size() * 8 + perm.size());
  for (std::int64_t b : base) {
    char buf[8];
    std::memcpy(buf, &b, 8);
    k.append(buf, 8);
  }
  for (int p : perm) k.push_back(static_cast<char>(p));
  return k;
}

Simplex freudenthal_simplex_at(const VectorXd& point, const Triangulation& t) {
  const int N = t.ambient_dim();
  Simplex s;
  s.base.resize(N);
  s.perm.resize(N);
  VectorXd frac(N);
  for (int c = 0; c < N; ++c) {
    const double x = (point(c) - t.offset(c)) / t.delta(c);
    double fl = std::floor(x);
    if (c == t.level_coord()) {
      // keep the simplex inside the slab when the point sits on the top
      fl = std::clamp(fl, static_cast<double>(t.level_idx_lo),
                      static_cast<double>(t.level_idx_hi - 1));
    }
    s.base[c] = static_cast<std::int64_t>(fl);
    frac(c) = x - fl;
  }
  // stable sort of fractional parts, descending; ties by coordinate index
  for (int c = 0; c < N; ++c) s.perm[c] = c;
  std::stable_sort(s.perm.begin(), s.perm.end(),
                   [&](int a, int b) { return frac(a) > frac(b); });
  return s;
}

Simplex pivot(const Simplex& s, int vertex_index, const Triangulation& t,
              int* new_vertex_index) {
  const int N = static_cast<int>(s.perm.size());
  if (vertex_index < 0 || vertex_index > N)
    throw std::invalid_argument("pivot: vertex index out of range");
  Simplex out = s;
  int new_pos;
  if (vertex_index == 0) {
    out.base[s.perm[0]] += 1;
    std::rotate(out.perm.begin(), out.perm.begin() + 1, out.perm.end());
    new_pos = N;
  } else if (vertex_index == N) {
    out.base[s.perm[N - 1]] -= 1;
    std::rotate(out.perm.rbegin(), out.perm.rbegin() + 1, out.perm.rend());
    new_pos = 0;
  } else {
    std::swap(out.perm[vertex_index - 1], out.perm[vertex_index]);
    new_pos = vertex_index;
  }
  const auto lat = out.vertex_lattice(new_pos);
  const std::int64_t lvl = lat[t.level_coord()];
  if (lvl < t.level_idx_lo || lvl > t.level_idx_hi)
    throw SlabBoundary("pivot: neighbor leaves the slab");
  if (new_vertex_index) *new_vertex_index = new_pos;
  return out;
}

bool completely_labeled(const MatrixXd& labels, MatrixXd* binv_out) {
  const int n = static_cast<int>(labels.rows());
  if (labels.cols() != n + 1)
    throw std::invalid_argument("completely_labeled: need n+1 label columns");
  MatrixXd A(n + 1, n + 1);
  A.row(0).setOnes();
  A.bottomRows(n) = labels;
  Eigen::FullPivLU<MatrixXd> lu(A);
  if (!lu.isInvertible()) return false;
  MatrixXd binv = lu.inverse();
  for (int i = 0; i <= n; ++i) {
    if (!lex_positive_row(binv.row(i))) return false;
  }
  if (binv_out) *binv_out = std::move(binv);
  return true;
}

int lp_pivot(MatrixXd& binv, const VectorXd& a) {
  const int m = static_cast<int>(binv.rows());
  const VectorXd w = binv * a;
  const double tol = 1e-11 * std::max(1.0, w.cwiseAbs().maxCoeff());
  int best = -1;
  for (int i = 0; i < m; ++i) {
    if (w(i) <= tol) continue;
    if (best < 0 ||
        lex_ratio_less(binv.row(i), w(i), binv.row(best), w(best))) {
      best = i;
    }
  }
  if (best < 0)
    throw NotTransverse("lp_pivot: no positive pivot weight (face not completely labeled)");
  const Eigen::RowVectorXd rowj = binv.row(best) / w(best);
  for (int i = 0; i < m; ++i) {
    if (i == best) continue;
    binv.row(i) -= w(i) * rowj;
  }
  binv.row(best) = rowj;
  return best;
}

int pl_step(const MatrixXd& labels, int in_face) {
  const int n = static_cast<int>(labels.rows());
  if (labels.cols() != n + 2)
    throw std::invalid_argument("pl_step: need n+2 label columns");
  MatrixXd facet(n, n + 1);
  int c = 0;
  for (int v = 0; v < n + 2; ++v) {
    if (v == in_face) continue;
    facet.col(c++) = labels.col(v);
  }
  MatrixXd binv;
  if (!completely_labeled(facet, &binv))
    throw NotTransverse("pl_step: in_face is not completely labeled");
  VectorXd a(n + 1);
  a(0) = 1.0;
  a.tail(n) = labels.col(in_face);
  const int j = lp_pivot(binv, a);
  return j < in_face ? j : j + 1;
}

namespace {

/// Door-in/door-out walker over the K1 triangulation of the slab.
class Walker {
 public:
  Walker(const HomotopyProblem& hp, const Triangulation& t)
      : hp_(hp), t_(t), n_(hp.n) {}

  /// Vertex labels: the bottom level plane carries the artificial affine
  /// labeling x - anchor (a restart plane in the sense of Merrill), whose
  /// unique PL zero is the start point; every other level carries the
  /// real homotopy labels.
  VectorXd label(const Simplex& s, int pos) const {
    const auto lat = s.vertex_lattice(pos);
    const VectorXd x = s.vertex(pos, t_);
    if (lat[t_.level_coord()] == t_.level_idx_lo) return x.head(n_) - anchor_;
    return hp_.h(x.head(n_), x(n_));
  }

  /// Starts the walk on the bottom-plane facet containing z_start. With
  /// the artificial restart labeling that facet is completely labeled by
  /// construction whenever z_start is interior to it; lattice-aligned
  /// starts fall back to a scan of the containing cube (labels are
  /// affine, so the scan is cheap).
  bool init(const VectorXd& z_start, std::int64_t level_idx,
            const FollowOptions&) {
    anchor_ = z_start;

    std::vector<std::int64_t> base0(n_);
    std::vector<int> perm0(n_);
    {
      VectorXd frac(n_);
      for (int c = 0; c < n_; ++c) {
        const double x = (z_start(c) - t_.offset(c)) / t_.delta(c);
        const double fl = std::floor(x);
        base0[c] = static_cast<std::int64_t>(fl);
        frac(c) = x - fl;
      }
      for (int c = 0; c < n_; ++c) perm0[c] = c;
      std::stable_sort(perm0.begin(), perm0.end(),
                       [&](int a, int b) { return frac(a) > frac(b); });
    }

    auto try_perm = [&](const std::vector<int>& pm) -> bool {
      Simplex s;
      s.base = base0;
      s.base.push_back(level_idx);
      s.perm.assign(pm.begin(), pm.end());
      s.perm.push_back(t_.level_coord());
      MatrixXd L(n_, n_ + 1);
      for (int c = 0; c <= n_; ++c) {
        const VectorXd x = s.vertex(c, t_);
        L.col(c) = x.head(n_) - anchor_;
      }
      if (!completely_labeled(L, nullptr)) return false;
      cur_ = std::move(s);
      labels_.resize(n_, n_ + 2);
      labels_.leftCols(n_ + 1) = L;
      labels_.col(n_ + 1) = label(cur_, n_ + 1);
      dropped_ = n_ + 1;
      return true;
    };

    if (try_perm(perm0)) return true;
    std::vector<int> pm(n_);
    for (int c = 0; c < n_; ++c) pm[c] = c;
    do {
      if (pm != perm0 && try_perm(pm)) return true;
    } while (std::next_permutation(pm.begin(), pm.end()));
    return false;
  }

  /// One door-in/door-out iteration: leave the current simplex through
  /// the completely labeled facet opposite the one we entered by, then
  /// pivot into the neighbor across it. Returns false when the walk must
  /// stop (status_ is set). The exit facet is recomputed from the stored
  /// labels each step, so no incremental factorization can drift.
  bool step() {
    int out;
    try {
      out = pl_step(labels_, dropped_);
    } catch (const NotTransverse&) {
      status_ = PathStatus::PivotFailed;
      return false;
    }

    // termination: exit facet entirely in the top or bottom level plane
    bool all_top = true, all_bottom = true;
    for (int c = 0; c <= n_ + 1; ++c) {
      if (c == out) continue;
      const auto lvl = cur_.vertex_lattice(c)[t_.level_coord()];
      all_top = all_top && (lvl == t_.level_idx_hi);
      all_bottom = all_bottom && (lvl == t_.level_idx_lo);
    }
    dropped_ = out;
    if (all_top) {
      status_ = PathStatus::ReachedTarget;
      return false;
    }
    if (all_bottom) {
      status_ = PathStatus::ReturnedToStart;
      return false;
    }

    // pivot into the neighboring simplex across the exit facet
    int new_pos;
    Simplex next;
    try {
      next = pivot(cur_, out, t_, &new_pos);
    } catch (const SlabBoundary&) {
      status_ = PathStatus::PivotFailed;
      return false;
    }
    // chain positions of the retained vertices shift when the first or
    // last vertex pivots; the label columns shift with them
    const int N = n_ + 1;
    if (out == 0) {
      MatrixXd nl(n_, N + 1);
      nl.leftCols(N) = labels_.rightCols(N);
      labels_ = std::move(nl);
    } else if (out == N) {
      MatrixXd nl(n_, N + 1);
      nl.rightCols(N) = labels_.leftCols(N);
      labels_ = std::move(nl);
    }
    cur_ = std::move(next);
    dropped_ = new_pos;
    labels_.col(new_pos) = label(cur_, new_pos);
    return true;
  }

  /// PL zero on the entry facet (all vertices except dropped_).
  VectorXd approx_zero(double* level_out) const {
    MatrixXd facet(n_, n_ + 1);
    std::vector<int> pos;
    pos.reserve(n_ + 1);
    for (int v = 0; v <= n_ + 1; ++v) {
      if (v == dropped_) continue;
      facet.col(static_cast<int>(pos.size())) = labels_.col(v);
      pos.push_back(v);
    }
    VectorXd x = VectorXd::Zero(n_ + 1);
    MatrixXd binv;
    if (completely_labeled(facet, &binv)) {
      const VectorXd w = binv.col(0);
      for (int c = 0; c <= n_; ++c) x += w(c) * cur_.vertex(pos[c], t_);
    } else {  // degenerate facet: fall back to its centroid
      for (int c = 0; c <= n_; ++c)
        x += cur_.vertex(pos[c], t_) / static_cast<double>(n_ + 1);
    }
    if (level_out) *level_out = x(n_);
    return x.head(n_);
  }

  const Simplex& simplex() const { return cur_; }
  PathStatus status() const { return status_; }

 private:
  const HomotopyProblem& hp_;
  const Triangulation& t_;
  int n_;
  VectorXd anchor_;   // start point; zero of the bottom-plane labeling
  Simplex cur_;
  MatrixXd labels_;   // n x (n+2), columns by chain position
  int dropped_ = 0;   // chain position omitted by the entry facet
  PathStatus status_ = PathStatus::BudgetExhausted;
};

}  // namespace

HomotopyProblem preconditioned(const HomotopyProblem& hp, const VectorXd& z0,
                               double level0, double fd_step) {
  MatrixXd J(hp.n, hp.n);
  for (int c = 0; c < hp.n; ++c) {
    VectorXd zp = z0, zm = z0;
    zp(c) += fd_step;
    zm(c) -= fd_step;
    J.col(c) = (hp.h(zp, level0) - hp.h(zm, level0)) / (2.0 * fd_step);
  }
  Eigen::FullPivLU<MatrixXd> lu(J);
  if (!lu.isInvertible())
    throw NotTransverse("preconditioned: singular Jacobian at the start");
  HomotopyProblem out = hp;
  auto solver = std::make_shared<Eigen::FullPivLU<MatrixXd>>(std::move(lu));
  auto base = hp.h;
  out.h = [solver, base](const VectorXd& z, double level) {
    VectorXd v = solver->solve(base(z, level));
    // Radially clamp huge labels (blow-up regions far from the path).
    // Positive rescaling of a label preserves its zero, keeps h continuous,
    // and stops ill-scaled columns from poisoning the lexicographic tests.
    const double cap = 1.0;
    const double nrm = v.norm();
    if (nrm > cap) v *= cap / nrm;
    return v;
  };
  return out;
}

PathResult follow_path(const HomotopyProblem& hp, const VectorXd& z_start,
                       const Triangulation& t, const FollowOptions& opts) {
  PathResult out;
  // the walk always starts on the slab's bottom level plane
  const std::int64_t l0 = t.level_idx_lo;

  Walker w(hp, t);
  if (!w.init(z_start, l0, opts)) {
    out.status = PathStatus::StartNotTransverse;
    return out;
  }

  std::unordered_set<std::string> visited;
  auto record = [&](std::int64_t step) {
    PathPoint p;
    p.step = step;
    p.z = w.approx_zero(&p.level);
    p.h_norm = hp.h(p.z, p.level).norm();
    out.trace.push_back(std::move(p));
  };

  std::int64_t step = 0;
  out.status = PathStatus::BudgetExhausted;
  for (; step < opts.budget; ++step) {
    if (opts.detect_cycles && !visited.insert(w.simplex().key()).second) {
      out.status = PathStatus::CycleDetected;
      break;
    }
    if (!w.step()) {
      out.status = w.status();
      break;
    }
    ++out.simplices_visited;
    if (step % opts.trace_stride == 0) record(step);
  }
  double lvl = 0.0;
  out.z_end = w.approx_zero(&lvl);
  out.level_end = lvl;
  record(step);
  return out;
}

Triangulation adaptive_refine(const std::vector<PathPoint>& trace,
                              const Triangulation& t,
                              const RefinePolicy& policy) {
  Triangulation out = t;
  if (static_cast<int>(trace.size()) < policy.min_points) return out;
  const int n = t.ambient_dim() - 1;
  for (int c = 0; c < n; ++c) {
    int changes = 0, increments = 0;
    double last = 0.0;
    bool have_last = false;
    for (size_t k = 1; k < trace.size(); ++k) {
      const double d = trace[k].z(c) - trace[k - 1].z(c);
      if (d == 0.0) continue;
      ++increments;
      if (have_last && d * last < 0.0) ++changes;
      last = d;
      have_last = true;
    }
    if (increments >= policy.min_points &&
        changes >= policy.oscillation_fraction * increments) {
      out.delta(c) *= 0.5;
    }
  }
  return out;
}

namespace {

HomotopyProblem shooting_homotopy(
    const ModelParams& params, const BoundaryConditions& bc,
    int label_euler_steps, bool vary_theta, double target) {
  odeint::IvpOptions integ;
  integ.method = odeint::Method::Euler;
  integ.steps = label_euler_steps;
  ArcStructure st;
  st.arcs = {ControlMode::Regularized};
  HomotopyProblem hp;
  hp.n = st.unknown_dim();
  hp.start_level = 0.0;
  hp.target_level = target;
  hp.h = [params, bc, integ, st, vary_theta](const VectorXd& z,
                                             double level) -> VectorXd {
    ModelParams p = params;
    if (vary_theta) {
      p.theta = level;
      p.lambda = 0.0;
    } else {
      p.theta = 1.0;
      p.lambda = level;
    }
    try {
      return shooting_residual(z, st, CostConvention::MinFuel, p, bc, integ);
    } catch (const std::exception&) {
      // undefined labels (t_f <= 0, blow-up) read as a large residual so
      // the walk treats the region as solution-free
      VectorXd big(st.unknown_dim());
      for (int i = 0; i < big.size(); ++i) big(i) = 1e8 * (1.0 + 0.01 * i);
      return big;
    }
  };
  return hp;
}

}  // namespace

HomotopyProblem atmosphere_homotopy(const ModelParams& params,
                                    const BoundaryConditions& bc,
                                    int label_euler_steps) {
  return shooting_homotopy(params, bc, label_euler_steps, true, 1.0);
}

HomotopyProblem main_homotopy(const ModelParams& params,
                              const BoundaryConditions& bc,
                              double target_level, int label_euler_steps) {
  return shooting_homotopy(params, bc, label_euler_steps, false, target_level);
}

void write_path_trace_csv(const std::vector<PathPoint>& trace,
                          const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  if (trace.empty()) return;
  f << "step,level";
  for (int c = 0; c < trace.front().z.size(); ++c) f << ",z_" << (c + 1);
  f << ",h_norm\n";
  char buf[32];
  for (const auto& p : trace) {
    f << p.step << ',';
    std::snprintf(buf, sizeof buf, "%.12e", p.level);
    f << buf;
    for (int c = 0; c < p.z.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12e", p.z(c));
      f << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.12e", p.h_norm);
    f << ',' << buf << '\n';
  }
}

}  // namespace goddard::simplicial
