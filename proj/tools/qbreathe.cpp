// Command-line front end: analytic level/band tables, single quench runs for
// each engine, spectral analysis of stored series, config-driven experiments,
// (g, N) sweeps and hyperbola overlays.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "qbreathe/busch.hpp"
#include "qbreathe/driver.hpp"
#include "qbreathe/fewbody.hpp"
#include "qbreathe/gp.hpp"

namespace fs = std::filesystem;
using namespace qbreathe;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw config_error("expected a comma-separated list of numbers");
  return out;
}

driver::ExperimentConfig load_config(const std::string& config_path,
                                     const std::vector<std::string>& overrides) {
  driver::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = driver::parse_config_file(config_path);
  for (const auto& o : overrides) driver::apply_override(cfg, o);
  return cfg;
}

int cmd_busch_levels(const std::string& g_csv, double omega, int n_levels,
                     const std::string& out_path) {
  const auto gs = parse_doubles(g_csv);
  std::ofstream out;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw config_error("cannot open " + out_path);
    os = &out;
  }
  *os << "# omega = " << fmt(omega) << "\n";
  *os << "level_index,g,energy\n";
  for (double g : gs) {
    auto spec = busch::rel_spectrum(g, omega, n_levels);
    for (int j = 0; j < n_levels; ++j)
      *os << 2 * j << "," << fmt(g) << "," << fmt(spec.levels[j]) << "\n";
  }
  return 0;
}

int cmd_busch_bands(double g, double omega_post, int max_quanta,
                    const std::string& out_path) {
  trap::QuenchSpec quench{1.0, omega_post, g, 2};
  auto bands = busch::band_spectrum(quench, max_quanta);
  std::ofstream out;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw config_error("cannot open " + out_path);
    os = &out;
  }
  *os << "# g = " << fmt(g) << "\n";
  *os << "# omega_post = " << fmt(omega_post) << "\n";
  *os << "kind,i,j,frequency_over_omega\n";
  for (const auto& line : bands.lines)
    *os << (line.kind == busch::LineKind::CenterOfMass ? "cm" : "rel") << "," << line.i
        << "," << line.j << "," << fmt(line.frequency_over_omega) << "\n";
  return 0;
}

int cmd_busch_validate() {
  auto v = driver::validate_relative_coupling({0.5, 2.0, 8.0});
  std::cout << "relative coupling g/sqrt(2): validated against ED\n";
  for (const auto& p : v.points)
    std::cout << "  g=" << fmt(p.g) << "  ed=" << fmt(p.ed_extrapolated)
              << "  analytic=" << fmt(p.analytic_sqrt2)
              << "  envelope=" << fmt(p.envelope) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"breathing-mode dynamics of contact-interacting bosons in a 1D trap"};
  app.require_subcommand(1);

  // --- busch ---
  auto* busch_cmd = app.add_subcommand("busch", "analytic two-body relative motion");
  busch_cmd->require_subcommand(1);

  std::string g_csv = "1.0";
  double omega = 1.0, omega_post = 0.9486832980505138;
  int n_levels = 6, max_quanta = 20;
  double g_single = 1.0;
  std::string out_path;

  auto* levels = busch_cmd->add_subcommand("levels", "even relative levels vs g");
  levels->add_option("--g", g_csv, "comma-separated interaction strengths");
  levels->add_option("--omega", omega, "relative trap frequency");
  levels->add_option("--n-levels", n_levels, "number of even levels");
  levels->add_option("--out", out_path, "output CSV (default stdout)");

  auto* bands = busch_cmd->add_subcommand("bands", "breathing band spectrum");
  bands->add_option("--g", g_single, "interaction strength");
  bands->add_option("--omega-post", omega_post, "post-quench trap frequency");
  bands->add_option("--max-quanta", max_quanta, "include states up to this many quanta");
  bands->add_option("--out", out_path, "output CSV (default stdout)");

  auto* validate = busch_cmd->add_subcommand(
      "validate", "cross-check the delta-coupling normalization against ED");

  // --- ed-quench ---
  auto* ed = app.add_subcommand("ed-quench", "exact-diagonalization quench run");
  int ed_n = 2, ed_m = 11, ed_periods = 200, ed_spp = 32;
  double ed_g = 1.0, ed_omega_post = 0.9486832980505138;
  std::string ed_out = "series.csv";
  ed->add_option("--n", ed_n, "particle number");
  ed->add_option("--m", ed_m, "orbital count");
  ed->add_option("--g", ed_g, "interaction strength");
  ed->add_option("--omega-post", ed_omega_post, "post-quench trap frequency");
  ed->add_option("--periods", ed_periods, "post-quench trap periods");
  ed->add_option("--samples-per-period", ed_spp, "samples per period");
  ed->add_option("--out", ed_out, "output series CSV");

  // --- gp-quench ---
  auto* gpc = app.add_subcommand("gp-quench", "mean-field quench run");
  int gp_n = 100, gp_periods = 60, gp_spp = 32, gp_points = 1024;
  double gp_g = 0.2, gp_omega_post = 0.9486832980505138;
  std::string gp_out = "series.csv";
  gpc->add_option("--n", gp_n, "particle number");
  gpc->add_option("--g", gp_g, "interaction strength");
  gpc->add_option("--omega-post", gp_omega_post, "post-quench trap frequency");
  gpc->add_option("--periods", gp_periods, "post-quench trap periods");
  gpc->add_option("--samples-per-period", gp_spp, "samples per period");
  gpc->add_option("--grid-points", gp_points, "spatial grid nodes");
  gpc->add_option("--out", gp_out, "output series CSV");

  // --- spectrum ---
  auto* sp = app.add_subcommand("spectrum", "spectral analysis of a stored series");
  std::string sp_in, sp_out = "spectrum.csv", sp_peaks = "peaks.csv";
  double sp_prominence = 0.05;
  sp->add_option("--in", sp_in, "input series CSV")->required();
  sp->add_option("--out", sp_out, "output spectrum CSV");
  sp->add_option("--peaks", sp_peaks, "output peaks CSV");
  sp->add_option("--min-prominence", sp_prominence, "peak prominence threshold");

  // --- run / sweep / overlay ---
  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "one configured experiment");
  run->add_option("--config", config_path, "config file");
  run->add_option("--set", overrides, "override, e.g. --set quench.g=2.0");

  auto* sw = app.add_subcommand("sweep", "(g, N) sweep to a contour table");
  std::string sweep_out = "contour.csv";
  sw->add_option("--config", config_path, "config file");
  sw->add_option("--set", overrides, "override, e.g. --set sweep.workers=4");
  sw->add_option("--out", sweep_out, "contour CSV path");

  auto* ov = app.add_subcommand("overlay", "constant-g(N-1) hyperbola overlay");
  std::string ov_in, ov_out = "overlay.csv", ov_levels;
  ov->add_option("--in", ov_in, "contour CSV")->required();
  ov->add_option("--levels", ov_levels, "comma-separated frequency levels (omega/Omega)")
      ->required();
  ov->add_option("--out", ov_out, "overlay CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (levels->parsed()) return cmd_busch_levels(g_csv, omega, n_levels, out_path);
    if (bands->parsed()) return cmd_busch_bands(g_single, omega_post, max_quanta, out_path);
    if (validate->parsed()) return cmd_busch_validate();

    if (ed->parsed()) {
      trap::QuenchSpec quench{1.0, ed_omega_post, ed_g, ed_n};
      fewbody::EdRunOptions opt;
      opt.n_orbitals = ed_m;
      opt.periods = ed_periods;
      opt.samples_per_period = ed_spp;
      auto res = fewbody::run_quench_experiment(quench, opt);
      write_series_csv(res.x2, ed_out);
      std::cout << "wrote " << ed_out << " (" << res.x2.count() << " samples, method "
                << res.method << ")\n";
      return 0;
    }

    if (gpc->parsed()) {
      const double lambda = gp_g * (gp_n - 1);
      gp::GPGrid grid;
      grid.n_points = gp_points;
      auto ground = gp::gp_ground_state(lambda, 1.0, grid);
      gp::EvolveOptions eopt;
      eopt.periods = gp_periods;
      eopt.samples_per_period = gp_spp;
      auto res = gp::gp_evolve(ground, lambda, gp_omega_post, eopt);
      res.x2.add_meta("g", gp_g);
      res.x2.add_meta("n_particles", double(gp_n));
      write_series_csv(res.x2, gp_out);
      std::cout << "wrote " << gp_out << " (" << res.x2.count() << " samples)\n";
      return 0;
    }

    if (sp->parsed()) {
      TimeSeries series = read_series_csv(sp_in);
      spectral::Spectrum spec = spectral::power_spectrum(series, {});
      spectral::write_spectrum_csv(spec, series.provenance, sp_out);
      auto peaks = spectral::fit_peaks(spec, sp_prominence);
      spectral::write_peaks_csv(peaks, series.provenance, sp_peaks);
      std::cout << "wrote " << sp_out << " and " << sp_peaks << " (" << peaks.peaks.size()
                << " peaks)\n";
      return 0;
    }

    if (run->parsed()) {
      auto cfg = load_config(config_path, overrides);
      auto res = driver::run_experiment(cfg);
      fs::create_directories(cfg.output_dir);
      for (const char* name : {"series.csv", "spectrum.csv", "peaks.csv", "result.json"})
        fs::copy_file(res.dir / name, fs::path(cfg.output_dir) / name,
                      fs::copy_options::overwrite_existing);
      std::cout << (res.from_cache ? "cache hit: " : "computed: ")
                << "freq/omega = " << fmt(res.breathing_freq_over_omega) << " +- "
                << fmt(res.sigma_over_omega) << "; artifacts in " << cfg.output_dir
                << "\n";
      return 0;
    }

    if (sw->parsed()) {
      auto cfg = load_config(config_path, overrides);
      auto table = driver::sweep(cfg);
      driver::write_contour_csv(table, sweep_out);
      int failed = 0;
      for (const auto& r : table.rows)
        if (!r.error.empty()) ++failed;
      std::cout << "wrote " << sweep_out << " (" << table.rows.size() << " rows, "
                << failed << " failed)\n";
      return 0;
    }

    if (ov->parsed()) {
      auto table = driver::read_contour_csv(ov_in);
      auto overlay = driver::gp_hyperbola_overlay(table, parse_doubles(ov_levels));
      driver::write_overlay_csv(overlay, ov_out);
      for (const auto& note : overlay.notes) std::cerr << "note: " << note << "\n";
      std::cout << "wrote " << ov_out << " (" << overlay.rows.size() << " rows)\n";
      return 0;
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
