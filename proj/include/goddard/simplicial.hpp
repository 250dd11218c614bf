#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "goddard/shooting.hpp"

namespace goddard::simplicial {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SlabBoundary : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotTransverse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Freudenthal (K1) triangulation of R^n x [level_lo, level_hi].
/// Coordinates 0..n-1 are the homotopy unknowns, coordinate n is the
/// homotopy level. Lattice point idx maps to offset + delta .* idx.
struct Triangulation {
  enum class Kind { FreudenthalK1 };
  Kind kind = Kind::FreudenthalK1;
  VectorXd delta;    // size n+1
  VectorXd offset;   // size n+1; level offset keeps slab bounds on-lattice
  std::int64_t level_idx_lo = 0;
  std::int64_t level_idx_hi = 0;

  int ambient_dim() const { return static_cast<int>(delta.size()); }
  int level_coord() const { return ambient_dim() - 1; }
  double level_value(std::int64_t idx) const {
    return offset(level_coord()) + delta(level_coord()) * idx;
  }

  /// Uniform triangulation of the slab [lo, hi] in the level coordinate;
  /// both bounds must land on the level lattice.
  static Triangulation make(const VectorXd& delta_z, double delta_level,
                            double level_lo, double level_hi,
                            const VectorXd& offset_z = VectorXd());
};

/// A K1 simplex: base lattice point plus a coordinate permutation.
/// Vertex i+1 = vertex i + delta * e_{perm[i]}.
struct Simplex {
  std::vector<std::int64_t> base;
  std::vector<int> perm;

  int n_vertices() const { return static_cast<int>(perm.size()) + 1; }
  std::vector<std::int64_t> vertex_lattice(int i) const;
  VectorXd vertex(int i, const Triangulation& t) const;
  std::string key() const;  // canonical key for cycle detection
};

/// The unique K1 simplex containing the point; ties at cell boundaries
/// break by descending fractional part, then coordinate index.
Simplex freudenthal_simplex_at(const VectorXd& point, const Triangulation& t);

/// Reflects across the facet opposite vertex_index. new_vertex_index
/// receives the chain position of the replacement vertex (positions of
/// the retained vertices shift by -1 / +1 when pivoting the first / last
/// vertex). Throws SlabBoundary when the neighbor leaves the slab.
Simplex pivot(const Simplex& s, int vertex_index, const Triangulation& t,
              int* new_vertex_index = nullptr);

/// A facet [v_1..v_{n+1}] with label matrix L (columns h(v_i)) is
/// completely labeled iff [1...1; L] is invertible with all rows of its
/// inverse lexicographically positive (the epsilon-perturbed system
/// solved symbolically). Optionally returns that inverse.
bool completely_labeled(const MatrixXd& labels, MatrixXd* binv_out = nullptr);

/// One lexicographic LP pivot: binv is the inverse for the current
/// completely labeled facet, a = (1, h(v_new)) the incoming column.
/// Returns the leaving column and updates binv in place.
int lp_pivot(MatrixXd& binv, const VectorXd& a);

/// Door-in/door-out step on a fully labeled simplex: labels holds all
/// n+2 vertex labels (columns), in_face is the omitted-vertex index of a
/// completely labeled facet. Returns the omitted-vertex index of the
/// other completely labeled facet.
int pl_step(const MatrixXd& labels, int in_face);

struct HomotopyProblem {
  std::function<VectorXd(const VectorXd&, double)> h;
  int n = 0;
  double start_level = 0.0;
  double target_level = 1.0;
};

/// Left-preconditions the homotopy by the inverse of a finite-difference
/// Jacobian of h(., level0) at z0: the returned problem has the same
/// zero set but a label map that is locally close to the identity, which
/// keeps the piecewise-linear walk well conditioned.
HomotopyProblem preconditioned(const HomotopyProblem& hp, const VectorXd& z0,
                               double level0, double fd_step = 1e-6);

struct PathPoint {
  std::int64_t step = 0;
  double level = 0.0;
  VectorXd z;
  double h_norm = 0.0;
};

struct FollowOptions {
  std::int64_t budget = 2'000'000;
  int trace_stride = 100;
  bool detect_cycles = true;
};

enum class PathStatus {
  ReachedTarget,
  BudgetExhausted,
  CycleDetected,
  StartNotTransverse,
  ReturnedToStart,
  PivotFailed
};

struct PathResult {
  PathStatus status = PathStatus::StartNotTransverse;
  VectorXd z_end;
  double level_end = 0.0;
  std::vector<PathPoint> trace;
  std::int64_t simplices_visited = 0;
};

/// Follows the PL zero path of hp from (z_start, start_level) until a
/// completely labeled facet lies in the target-level plane. The bottom
/// level plane carries an artificial affine labeling x - z_start (a
/// restart plane), so the walk always starts on the facet containing
/// z_start; z_start should therefore be a good approximate zero of
/// h(., start_level).
PathResult follow_path(const HomotopyProblem& hp, const VectorXd& z_start,
                       const Triangulation& t, const FollowOptions& opts);

struct RefinePolicy {
  double oscillation_fraction = 0.25;  // sign-change count / increments
  int min_points = 16;
};

/// Halves the meshsize of unknown coordinates whose traced increments
/// oscillate; level meshsize is never changed. Never increases delta.
Triangulation adaptive_refine(const std::vector<PathPoint>& trace,
                              const Triangulation& t,
                              const RefinePolicy& policy);

/// Preliminary homotopy on the atmosphere density: the fully regularized
/// (lambda = 0) shooting residual with drag scale theta = level, labeled
/// with a rough fixed-step Euler integration.
HomotopyProblem atmosphere_homotopy(const ModelParams& params,
                                    const BoundaryConditions& bc,
                                    int label_euler_steps = 25);

/// Main homotopy on the quadratic cost regularization at full
/// atmosphere: lambda = level, quadratic weight 1 - lambda.
HomotopyProblem main_homotopy(const ModelParams& params,
                              const BoundaryConditions& bc,
                              double target_level = 0.8,
                              int label_euler_steps = 25);

void write_path_trace_csv(const std::vector<PathPoint>& trace,
                          const std::string& path);

}  // namespace goddard::simplicial
