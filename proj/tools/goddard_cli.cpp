#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "goddard/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fuel-optimal 3D ascent trajectories: indirect shooting with "
               "piecewise-linear continuation, direct transcription and an "
               "on-off comparator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, pipeline_name;
  bool emit = false;
  auto* solve = app.add_subcommand("solve", "run a pipeline from a config");
  solve->add_option("config", config_path, "JSON config file")->required();
  solve->add_option("--out", out_dir, "override the output directory");
  solve->add_option("--pipeline", pipeline_name, "override the pipeline");
  solve->add_flag("--emit-plots", emit, "also write figure CSV/SVG files");

  std::string solution_path, kind;
  auto* plots = app.add_subcommand("plots", "emit figures from a solution");
  plots->add_option("solution", solution_path, "solution JSON")->required();
  plots->add_option("--kind", kind, "state|control|switching|path|compare")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      goddard::io::RunConfig cfg = goddard::io::load_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!pipeline_name.empty())
        cfg.pipeline = goddard::io::pipeline_from_string(pipeline_name);
      const auto art = goddard::pipeline::run(cfg, emit);
      for (const auto& f : art.files_written)
        std::printf("wrote %s\n", f.c_str());
    } else {
      const auto files = goddard::io::emit_plots(solution_path, kind);
      for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
    }
  } catch (const goddard::io::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solve error: %s\n", e.what());
    return 1;
  }
  return 0;
}
