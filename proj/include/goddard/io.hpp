#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "goddard/direct.hpp"
#include "goddard/shooting.hpp"

namespace goddard::io {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Pipeline { IndirectFull, IndirectShootOnly, Direct, OnOff, Compare };

std::string to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& s);

struct HomotopySettings {
  double atmosphere_delta = 1e-2;  // meshsize of the drag homotopy
  double main_delta = 1e-4;        // meshsize of the regularization homotopy
  double main_target = 0.8;        // level at which the PL walk hands over
  std::int64_t budget = 2'000'000;
  int label_euler_steps = 25;
};

struct IntegratorSettings {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
};

struct RunConfig {
  ModelParams model;
  BoundaryConditions boundary;
  Pipeline pipeline = Pipeline::IndirectFull;
  ArcStructure structure;  // target structure of the final shoot
  HomotopySettings homotopy;
  IntegratorSettings integrator;
  std::string output_dir = "out";
  int direct_nodes = 100;
  int onoff_nodes = 20;
  unsigned seed = 0;
  std::vector<double> z0;  // initial unknowns for IndirectShootOnly
  // solution-document paths for the Compare pipeline
  std::map<std::string, std::string> compare_inputs;
};

/// Parses a config file; malformed JSON raises ConfigError with the
/// parser's byte/line position, unknown enum values raise ConfigError.
RunConfig load_config(const std::string& path);
RunConfig config_from_json(const json& j);
json config_to_json(const RunConfig& cfg);

/// Canonical serialization: keys sorted, two-space indent, every float
/// printed as %.12e. parse -> dump of a canonical file is byte-identical.
std::string canonical_dump(const json& j);

/// Parses a JSON file, mapping parse failures to ConfigError with position.
json load_json(const std::string& path);

/// Writes text atomically (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& text);

json solution_document(const RunConfig& cfg, const Solution& s);
json solution_document(const RunConfig& cfg, const direct::DirectSolution& s,
                       bool onoff);
json comparison_document(const RunConfig& cfg,
                         const direct::ComparisonReport& rep,
                         const direct::ControlProfile& indirect,
                         const direct::ControlProfile& dir,
                         const direct::ControlProfile& onoff);

/// Checks schema version and equal trace-array lengths.
void validate_solution_document(const json& doc);

direct::ControlProfile profile_from_document(const json& doc);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Fixed 800x600 polyline plot with axes, ticks and a legend; exactly one
/// polyline per series, no external assets.
std::string render_svg_plot(const std::string& title,
                            const std::vector<Series>& series);

std::string render_csv(const std::vector<Series>& series);

/// Writes CSV + SVG figure data for one solution document.
/// kind in {state, control, switching, path, compare}; outputs land next
/// to the document as <stem>_<kind>.{csv,svg}.
std::vector<std::string> emit_plots(const std::string& solution_path,
                                    const std::string& kind);

}  // namespace goddard::io
