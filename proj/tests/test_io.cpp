#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "goddard/io.hpp"

using namespace goddard;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("goddard_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Solution tiny_solution() {
  Solution s;
  s.unknowns = Eigen::VectorXd::LinSpaced(8, 0.1, 0.8);
  s.t_f = 0.21;
  s.objective = 0.4;
  s.final_mass = 0.6;
  s.switch_times_physical = {0.02, 0.08};
  for (int i = 0; i <= 10; ++i) {
    TracePoint p;
    p.s = i / 10.0;
    p.t = p.s * s.t_f;
    p.e.x = RocketState{Vec3(1, 0, 0), Vec3(0.1, 0, 0), 1.0 - 0.03 * i};
    p.e.p = Costate{Vec3(0.1, 0, 0), Vec3(0.5, 0, 0), -0.1};
    p.u = Vec3(1, 0, 0);
    p.u_norm = i < 5 ? 1.0 : 0.0;
    p.psi = 0.5 - 0.1 * i;
    p.H = 1e-9;
    p.arc = i < 5 ? 0 : 1;
    s.trace.push_back(p);
  }
  s.newton_diag = {1e-7, 12, 1e5};
  return s;
}

}  // namespace

TEST_CASE("pipeline enum round-trips and rejects unknown names") {
  using io::Pipeline;
  for (Pipeline p : {Pipeline::IndirectFull, Pipeline::IndirectShootOnly,
                     Pipeline::Direct, Pipeline::OnOff, Pipeline::Compare}) {
    CHECK(io::pipeline_from_string(io::to_string(p)) == p);
  }
  CHECK_THROWS_AS(io::pipeline_from_string("warp_drive"), io::ConfigError);
}

TEST_CASE("config JSON round-trip preserves every field") {
  io::RunConfig cfg;
  cfg.model.theta = 0.5;
  cfg.model.K_D = 123.0;
  cfg.boundary.rf = Vec3(1.02, 0.001, -0.002);
  cfg.pipeline = io::Pipeline::Direct;
  cfg.homotopy.main_delta = 5e-5;
  cfg.homotopy.budget = 12345;
  cfg.integrator.abs_tol = 1e-9;
  cfg.output_dir = "elsewhere";
  cfg.direct_nodes = 64;
  cfg.onoff_nodes = 10;
  cfg.seed = 9;
  cfg.z0 = {1, 2, 3, 4, 5, 6, 7, 8};
  cfg.structure.arcs = {ControlMode::MaxThrust, ControlMode::Singular,
                        ControlMode::NullThrust};
  const io::RunConfig back = io::config_from_json(io::config_to_json(cfg));
  const io::json ja = io::config_to_json(cfg), jb = io::config_to_json(back);
  CHECK(io::canonical_dump(ja) == io::canonical_dump(jb));
  CHECK(back.model.K_D == 123.0);
  CHECK(back.pipeline == io::Pipeline::Direct);
  CHECK(back.structure.arcs.size() == 3);
  CHECK(back.z0.size() == 8);
}

TEST_CASE("canonical dump is a fixed point of parse -> dump") {
  io::json j;
  j["b"] = 0.1;
  j["a"] = {1.0, 2.5, 3.25};
  j["nested"] = {{"x", 1e-12}, {"y", "text"}, {"flag", true}};
  const std::string once = io::canonical_dump(j);
  const std::string twice = io::canonical_dump(io::json::parse(once));
  CHECK(once == twice);
  // Keys are sorted and floats carry full precision.
  CHECK(once.find("\"a\"") < once.find("\"b\""));
  CHECK(once.find("e-12") != std::string::npos);
}

TEST_CASE("malformed config files raise ConfigError with a position") {
  TempDir tmp;
  const auto bad = (tmp.path / "bad.json").string();
  std::ofstream(bad) << "{ \"model\": { \"C\": 3.5, }";
  CHECK_THROWS_AS(io::load_config(bad), io::ConfigError);
  try {
    io::load_config(bad);
  } catch (const io::ConfigError& e) {
    // The parser position must be carried in the message.
    CHECK(std::string(e.what()).find_first_of("0123456789") !=
          std::string::npos);
  }
  CHECK_THROWS_AS(io::load_config((tmp.path / "missing.json").string()),
                  io::ConfigError);

  // Unknown enum value.
  io::json j = io::config_to_json(io::RunConfig{});
  j["pipeline"] = "nonsense";
  CHECK_THROWS_AS(io::config_from_json(j), io::ConfigError);
}

TEST_CASE("solution documents validate and expose control profiles") {
  io::RunConfig cfg;
  const Solution s = tiny_solution();
  io::json doc = io::solution_document(cfg, s);
  io::validate_solution_document(doc);
  CHECK(doc["kind"] == "indirect");
  CHECK(doc["t_f"] == doctest::Approx(0.21));
  CHECK(doc["trace"]["t"].size() == s.trace.size());

  const direct::ControlProfile p = io::profile_from_document(doc);
  CHECK(p.t.size() == s.trace.size());
  CHECK(p.u_norm.front() == doctest::Approx(1.0));
  CHECK(p.t_f == doctest::Approx(0.21));
  CHECK(p.objective == doctest::Approx(0.4));

  // Unequal trace arrays are a schema violation.
  doc["trace"]["psi"].erase(0);
  CHECK_THROWS_AS(io::validate_solution_document(doc), io::SchemaMismatch);
  io::json nover;
  nover["t_f"] = 0.2;
  CHECK_THROWS_AS(io::validate_solution_document(nover), io::SchemaMismatch);
}

TEST_CASE("atomic writes leave no partial files") {
  TempDir tmp;
  const auto p = (tmp.path / "out.txt").string();
  io::write_text_atomic(p, "hello\n");
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "hello");
  // Overwrite in place.
  io::write_text_atomic(p, "world\n");
  std::ifstream in2(p);
  std::getline(in2, line);
  CHECK(line == "world");
  // No stray temporaries remain.
  int files = 0;
  for (auto& e : fs::directory_iterator(tmp.path)) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("SVG plots contain one polyline per series plus axes") {
  std::vector<io::Series> series(2);
  series[0].name = "a";
  series[1].name = "b";
  for (int i = 0; i <= 10; ++i) {
    series[0].x.push_back(i);
    series[0].y.push_back(i * i);
    series[1].x.push_back(i);
    series[1].y.push_back(10 - i);
  }
  const std::string svg = io::render_svg_plot("title", series);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("800") != std::string::npos);
  CHECK(svg.find("600") != std::string::npos);
  size_t count = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++count;
    ++pos;
  }
  CHECK(count == 2);
  CHECK(svg.find("title") != std::string::npos);
  CHECK(svg.find("href=") == std::string::npos);  // no external assets
}

TEST_CASE("CSV rendering shares the abscissa when possible") {
  std::vector<io::Series> series(2);
  series[0].name = "a";
  series[1].name = "b";
  for (int i = 0; i < 3; ++i) {
    series[0].x.push_back(i);
    series[0].y.push_back(2 * i);
    series[1].x.push_back(i);
    series[1].y.push_back(3 * i);
  }
  const std::string csv = io::render_csv(series);
  CHECK(csv.rfind("t,a,b\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("emit_plots writes CSV and SVG next to the document") {
  TempDir tmp;
  io::RunConfig cfg;
  const Solution s = tiny_solution();
  const auto doc_path = (tmp.path / "solution.json").string();
  io::write_text_atomic(doc_path,
                        io::canonical_dump(io::solution_document(cfg, s)));
  const auto files = io::emit_plots(doc_path, "control");
  REQUIRE(files.size() >= 2);
  bool csv = false, svg = false;
  for (const auto& f : files) {
    CHECK(fs::exists(f));
    CHECK(fs::path(f).parent_path() == tmp.path);
    csv = csv || f.ends_with(".csv");
    svg = svg || f.ends_with(".svg");
  }
  CHECK(csv);
  CHECK(svg);
}
