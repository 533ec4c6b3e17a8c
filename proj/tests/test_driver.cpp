#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qbreathe/driver.hpp"

using namespace qbreathe;
using namespace qbreathe::driver;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const std::string text = R"(
# comment
[quench]
omega_post = 0.8
g = 2.5          # inline comment
n_particles = 3

[engine]
type = ed
m_orbitals = 7

[sweep]
g_values = 0.2, 0.4
n_values = 2,3,4
)";
  ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.quench.omega_post == doctest::Approx(0.8));
  CHECK(cfg.quench.g == doctest::Approx(2.5));
  CHECK(cfg.quench.n_particles == 3);
  CHECK(cfg.engine == Engine::Ed);
  CHECK(cfg.m_orbitals == 7);
  CHECK(cfg.sweep_g.size() == 2);
  CHECK(cfg.sweep_n.size() == 3);

  CHECK_THROWS_AS(parse_config_text("[quench]\nbogus = 1\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("[quench]\ng = abc\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("stray line\n"), config_error);

  ExperimentConfig o = cfg;
  apply_override(o, "quench.g=9.5");
  CHECK(o.quench.g == doctest::Approx(9.5));
  CHECK_THROWS_AS(apply_override(o, "nonsense"), config_error);
}

TEST_CASE("config validation names the offending key") {
  ExperimentConfig cfg;
  cfg.engine = Engine::Ed;
  cfg.quench.n_particles = 14;
  cfg.m_orbitals = 14;  // C(27,13) = 20'058'300 > default cap
  try {
    cfg.validate();
    FAIL("expected a basis-cap error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("basis_cap") != std::string::npos);
  }

  ExperimentConfig an;
  an.engine = Engine::Analytic;
  an.quench.n_particles = 3;
  CHECK_THROWS_AS(an.validate(), config_error);
}

TEST_CASE("canonical text is engine specific and deterministic") {
  ExperimentConfig a;
  a.engine = Engine::Gp;
  ExperimentConfig b = a;
  CHECK(canonical_text(a) == canonical_text(b));
  b.gp_grid_points = 2048;
  CHECK(canonical_text(a) != canonical_text(b));
  // ed-only knobs must not leak into the gp key
  b = a;
  b.m_orbitals = 17;
  CHECK(canonical_text(a) == canonical_text(b));
}

TEST_CASE("result cache") {
  const fs::path root = fresh_dir("qbreathe_cache_test");
  ResultCache cache(root);
  const std::string canon = "engine.type = test\nquench.g = 1\n";

  CHECK(!cache.lookup(canon).has_value());
  int writes = 0;
  auto dir = cache.publish(canon, [&](const fs::path& tmp) {
    ++writes;
    std::ofstream(tmp / "artifact.txt") << "payload";
  });
  CHECK(writes == 1);
  REQUIRE(cache.lookup(canon).has_value());
  CHECK(slurp(dir / "artifact.txt") == "payload");

  // identical republish is a no-op
  auto dir2 = cache.publish(canon, [&](const fs::path&) { ++writes; });
  CHECK(writes == 1);
  CHECK(dir2 == dir);

  // a corrupted echo no longer matches
  std::ofstream(dir / "config.txt") << "tampered";
  CHECK(!cache.lookup(canon).has_value());
}

TEST_CASE("run experiment caches byte-identical artifacts") {
  const fs::path root = fresh_dir("qbreathe_run_test");
  ExperimentConfig cfg;
  cfg.engine = Engine::Ed;
  cfg.quench = trap::default_quench(0.8, 2);
  cfg.m_orbitals = 6;
  cfg.periods = 40;
  cfg.samples_per_period = 16;
  cfg.cache_dir = (root / "cache").string();

  RunResult first = run_experiment(cfg);
  CHECK(!first.from_cache);
  CHECK(first.breathing_freq_over_omega > 1.5);
  CHECK(first.breathing_freq_over_omega < 2.5);
  const std::string series_bytes = slurp(first.dir / "series.csv");

  RunResult second = run_experiment(cfg);
  CHECK(second.from_cache);
  CHECK(slurp(second.dir / "series.csv") == series_bytes);
  CHECK(second.breathing_freq_over_omega ==
        doctest::Approx(first.breathing_freq_over_omega).epsilon(1e-14));

  // any parameter change invalidates
  ExperimentConfig changed = cfg;
  changed.quench.g = 0.81;
  RunResult third = run_experiment(changed);
  CHECK(!third.from_cache);
}

TEST_CASE("free two-boson run fits the bare breathing line") {
  const fs::path root = fresh_dir("qbreathe_free_run");
  ExperimentConfig cfg;
  cfg.engine = Engine::Ed;
  cfg.quench = trap::default_quench(0.0, 2);
  cfg.m_orbitals = 6;
  cfg.periods = 40;
  cfg.samples_per_period = 32;
  cfg.cache_dir = (root / "cache").string();
  RunResult r = run_experiment(cfg);
  CHECK(std::abs(r.breathing_freq_over_omega - 2.0) <= 1.0 / cfg.periods);
}

TEST_CASE("analytic and ed engines agree on the lowest band") {
  const fs::path root = fresh_dir("qbreathe_cross_engine");
  ExperimentConfig cfg;
  cfg.quench = trap::default_quench(1.0, 2);
  cfg.periods = 150;
  cfg.samples_per_period = 32;
  cfg.cache_dir = (root / "cache").string();

  ExperimentConfig an = cfg;
  an.engine = Engine::Analytic;
  ExperimentConfig ed = cfg;
  ed.engine = Engine::Ed;
  ed.m_orbitals = 11;

  RunResult ra = run_experiment(an);
  RunResult re = run_experiment(ed);
  CHECK(std::abs(ra.breathing_freq_over_omega - re.breathing_freq_over_omega) < 0.02);
}

TEST_CASE("breathing peak selection") {
  spectral::PeakSet peaks;
  peaks.resolution = 0.005;
  const double w = 1.0;

  SUBCASE("single line goes through") {
    peaks.peaks = {{2.0, 0.01, 1.0, 0.01, 0.005}};
    auto p = select_breathing_peak(peaks, w);
    REQUIRE(p);
    CHECK(p->center == doctest::Approx(2.0));
  }
  SUBCASE("relative line is the lower of two strong lines") {
    peaks.peaks = {{2.0, 0.01, 1.0, 0.01, 0.005}, {1.85, 0.01, 0.8, 0.01, 0.005}};
    auto p = select_breathing_peak(peaks, w);
    REQUIRE(p);
    CHECK(p->center == doctest::Approx(1.85));
  }
  SUBCASE("weak sidebands are ignored") {
    peaks.peaks = {{1.85, 0.01, 1.0, 0.01, 0.005}, {1.95, 0.01, 0.01, 0.01, 0.005}};
    auto p = select_breathing_peak(peaks, w);
    REQUIRE(p);
    CHECK(p->center == doctest::Approx(1.85));
  }
  SUBCASE("out-of-band peaks never win") {
    peaks.peaks = {{4.0, 0.01, 5.0, 0.01, 0.005}, {1.9, 0.01, 1.0, 0.01, 0.005}};
    auto p = select_breathing_peak(peaks, w);
    REQUIRE(p);
    CHECK(p->center == doctest::Approx(1.9));
  }
  SUBCASE("empty set yields nothing") {
    CHECK(!select_breathing_peak(peaks, w).has_value());
  }
}

TEST_CASE("sweep over a small gp grid") {
  const fs::path root = fresh_dir("qbreathe_sweep_test");
  ExperimentConfig cfg;
  cfg.engine = Engine::Gp;
  cfg.quench = trap::default_quench(0.0, 2);
  cfg.periods = 15;
  cfg.samples_per_period = 32;
  cfg.gp_grid_points = 256;
  cfg.sweep_g = {0.2, 0.4};
  cfg.sweep_n = {11, 21};
  cfg.workers = 2;
  cfg.cache_dir = (root / "cache").string();

  ContourTable table = sweep(cfg);
  REQUIRE(table.rows.size() == 4);
  for (const auto& r : table.rows) {
    CHECK(r.error.empty());
    CHECK(r.freq_over_omega > std::sqrt(3.0) - 0.05);
    CHECK(r.freq_over_omega < 2.0 + 0.05);
  }
  // sorted by (g, N)
  CHECK(table.rows[0].g == doctest::Approx(0.2));
  CHECK(table.rows[0].n_particles == 11);
  CHECK(table.rows[3].g == doctest::Approx(0.4));
  CHECK(table.rows[3].n_particles == 21);

  // equal-Lambda rows agree: (0.2, 21) vs (0.4, 11)
  double fa = 0.0, fb = 0.0;
  for (const auto& r : table.rows) {
    if (r.g == 0.2 && r.n_particles == 21) fa = r.freq_over_omega;
    if (r.g == 0.4 && r.n_particles == 11) fb = r.freq_over_omega;
  }
  CHECK(std::abs(fa - fb) < 1e-10);

  // a second sweep is served from the cache and sorts identically
  ContourTable again = sweep(cfg);
  REQUIRE(again.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    CHECK(again.rows[i].freq_over_omega ==
          doctest::Approx(table.rows[i].freq_over_omega).epsilon(1e-14));

  // contour csv round trip
  const fs::path csv = root / "contour.csv";
  write_contour_csv(table, csv.string());
  ContourTable back = read_contour_csv(csv.string());
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(back.rows[i].g == doctest::Approx(table.rows[i].g));
    CHECK(back.rows[i].freq_over_omega ==
          doctest::Approx(table.rows[i].freq_over_omega).epsilon(1e-10));
  }
}

TEST_CASE("hyperbola overlay") {
  SUBCASE("exact lambda scaling has zero deviation") {
    // synthetic table: freq depends on g (N-1) alone; levels anchored at
    // right-edge grid values so the hyperbolas pass through grid nodes
    ContourTable table;
    auto freq = [](double lambda) { return 2.0 - 0.2 * lambda / (lambda + 5.0); };
    for (double g : {0.1, 0.2, 0.4, 0.8, 1.0, 2.0, 4.0})
      for (int n : {11, 21, 51, 101})
        table.rows.push_back({g, n, "gp", freq(g * (n - 1)), 1e-4, "", ""});

    auto overlay = gp_hyperbola_overlay(table, {freq(0.2 * 100), freq(0.4 * 100)});
    int exact_hits = 0;
    for (const auto& r : overlay.rows) {
      if (std::isnan(r.deviation)) continue;  // hyperbola left the sampled window
      CHECK(std::abs(r.deviation) < 1e-9);
      ++exact_hits;
    }
    CHECK(exact_hits >= 6);
  }
  SUBCASE("broken scaling shows up as deviation") {
    ContourTable table;
    for (double g : {0.1, 0.2, 0.4, 0.8})
      for (int n : {3, 5, 9})
        table.rows.push_back(
            {g, n, "ed", 2.0 - 0.1 * g - 0.01 * n, 1e-4, "", ""});
    auto overlay = gp_hyperbola_overlay(table, {1.9});
    bool nonzero = false;
    for (const auto& r : overlay.rows)
      if (!std::isnan(r.deviation) && std::abs(r.deviation) > 1e-4) nonzero = true;
    CHECK(nonzero);
  }
  SUBCASE("empty table, empty overlay") {
    ContourTable table;
    auto overlay = gp_hyperbola_overlay(table, {1.9});
    CHECK(overlay.rows.empty());
    CHECK(overlay.notes.empty());
  }
  SUBCASE("out-of-range level is skipped with a note") {
    ContourTable table;
    for (double g : {0.1, 0.2})
      for (int n : {11, 21}) table.rows.push_back({g, n, "gp", 1.9, 1e-4, "", ""});
    auto overlay = gp_hyperbola_overlay(table, {1.2});
    CHECK(overlay.rows.empty());
    REQUIRE(!overlay.notes.empty());
    CHECK(overlay.notes[0].find("skipped") != std::string::npos);
  }
}

TEST_CASE("relative coupling validation picks g over sqrt(2)") {
  auto v = validate_relative_coupling({0.5, 2.0}, {6, 10, 14});
  CHECK(v.sqrt2_wins);
  for (const auto& p : v.points) {
    CHECK(std::abs(p.ed_extrapolated - p.analytic_sqrt2) < 0.6 * std::abs(p.ed_extrapolated - p.analytic_plain));
  }
}

TEST_CASE("auto orbital reduction") {
  CHECK(auto_orbitals(2, 11, 4000) == 11);
  // C(N+M-1, M-1) for N = 8: M = 8 gives 6435 > 4000, M = 7 gives 3003
  CHECK(auto_orbitals(8, 8, 4000) == 7);
  CHECK(auto_orbitals(8, 8, 10000) == 8);
}
