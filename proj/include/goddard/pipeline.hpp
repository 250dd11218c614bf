#pragma once

#include <nlohmann/json.hpp>

#include "goddard/io.hpp"
#include "goddard/simplicial.hpp"

namespace goddard::pipeline {

struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndirectFullResult {
  Solution solution;
  std::vector<simplicial::PathPoint> atmosphere_path;
  std::vector<simplicial::PathPoint> main_path;
  std::int64_t atmosphere_simplices = 0;  // total simplices crossed per walk
  std::int64_t main_simplices = 0;
  Eigen::VectorXd z_regularized;  // converged unknowns at the handover level
  double t1 = 0.0, t2 = 0.0;      // extracted switching-time seeds (normalized)
};

/// Full indirect chain: Newton in vacuum, piecewise-linear walk on the
/// drag scale, piecewise-linear walk on the cost regularization up to the
/// handover level, then the structured three-arc shoot.
IndirectFullResult indirect_full(const io::RunConfig& cfg);

struct RunArtifacts {
  nlohmann::json document;
  std::vector<std::string> files_written;
};

/// Executes the configured pipeline; writes the solution document, trace
/// CSVs and (optionally) figure files into cfg.output_dir.
RunArtifacts run(const io::RunConfig& cfg, bool emit_figures = false);

}  // namespace goddard::pipeline
