#include "qbreathe/driver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "qbreathe/busch.hpp"
#include "qbreathe/fewbody.hpp"
#include "qbreathe/gp.hpp"

namespace qbreathe::driver {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

TimeSeries compute_series(const ExperimentConfig& c) {
  switch (c.engine) {
    case Engine::Analytic: {
      busch::AnalyticSignalOptions opt;
      opt.max_quanta = c.max_quanta;
      const double period = 2.0 * kPi / c.quench.omega_post;
      const double dt = period / c.samples_per_period;
      auto sig = busch::breathing_signal_analytic(c.quench, opt, 0.0, dt,
                                                  c.periods * c.samples_per_period);
      for (const auto& w : sig.warnings) std::cerr << "warning: " << w << "\n";
      return std::move(sig.series);
    }
    case Engine::Ed: {
      fewbody::EdRunOptions opt;
      opt.n_orbitals = c.m_orbitals;
      opt.periods = c.periods;
      opt.samples_per_period = c.samples_per_period;
      opt.basis_cap = c.basis_cap;
      opt.propagation.dense_dim_max = c.dense_dim_max;
      opt.propagation.krylov_tol = c.krylov_tol;
      opt.propagation.krylov_dim = c.krylov_dim;
      auto run = fewbody::run_quench_experiment(c.quench, opt);
      return std::move(run.x2);
    }
    case Engine::Gp: {
      const double lambda = c.quench.g * (c.quench.n_particles - 1);
      gp::GPGrid grid;
      grid.n_points = c.gp_grid_points;
      grid.extent = c.gp_extent;
      gp::GPField ground = gp::gp_ground_state(lambda, c.quench.omega_pre, grid);
      gp::EvolveOptions eopt;
      eopt.periods = c.periods;
      eopt.samples_per_period = c.samples_per_period;
      eopt.dt_periods = c.gp_dt_periods;
      auto run = gp::gp_evolve(ground, lambda, c.quench.omega_post, eopt);
      run.x2.add_meta("g", c.quench.g);
      run.x2.add_meta("n_particles", double(c.quench.n_particles));
      return std::move(run.x2);
    }
  }
  throw config_error("unknown engine");
}

struct Analysis {
  spectral::PeakSet peaks;
  double freq_over_omega = 0.0;
  double sigma_over_omega = 0.0;
};

Analysis analyze_series(const ExperimentConfig& c, const TimeSeries& series) {
  Analysis a;
  spectral::SpectrumOptions sopt;
  sopt.window = c.window;
  sopt.zero_pad_factor = c.zero_pad;
  spectral::Spectrum spec = spectral::power_spectrum(series, sopt);
  a.peaks = spectral::fit_peaks(spec, c.min_prominence, c.lorentz_window_bins);

  const double omega = c.quench.omega_post;
  if (c.engine == Engine::Gp) {
    spectral::SineFit fit = spectral::fit_sine(series);
    a.freq_over_omega = fit.frequency / omega;
    a.sigma_over_omega =
        std::max(fit.residual * 2.0 * kPi / series.duration(), 1e-10) / omega;
  } else {
    auto peak = select_breathing_peak(a.peaks, omega);
    if (!peak)
      throw numeric_error("run: no breathing peak found in the lowest band");
    a.freq_over_omega = peak->center / omega;
    a.sigma_over_omega = peak->sigma / omega;
  }
  return a;
}

void write_artifacts(const ExperimentConfig& c, const TimeSeries& series,
                     const Analysis& a, const fs::path& dir) {
  write_series_csv(series, (dir / "series.csv").string());

  spectral::SpectrumOptions sopt;
  sopt.window = c.window;
  sopt.zero_pad_factor = c.zero_pad;
  spectral::Spectrum spec = spectral::power_spectrum(series, sopt);
  spectral::write_spectrum_csv(spec, series.provenance, (dir / "spectrum.csv").string());
  spectral::write_peaks_csv(a.peaks, series.provenance, (dir / "peaks.csv").string());

  json result;
  result["engine"] = engine_name(c.engine);
  result["g"] = c.quench.g;
  result["n_particles"] = c.quench.n_particles;
  result["omega_post"] = c.quench.omega_post;
  result["freq_over_omega"] = a.freq_over_omega;
  result["sigma_over_omega"] = a.sigma_over_omega;
  result["version"] = kVersion;
  std::ofstream out(dir / "result.json");
  out << result.dump(2) << "\n";
  if (!out) throw config_error("run: cannot write result.json");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string canonical = canonical_text(config);
  ResultCache cache(config.cache_dir);

  RunResult res;
  if (auto hit = cache.lookup(canonical)) {
    res.dir = *hit;
    res.from_cache = true;
    res.series = read_series_csv((*hit / "series.csv").string());
    std::ifstream in(*hit / "result.json");
    json j = json::parse(in);
    res.breathing_freq_over_omega = j["freq_over_omega"];
    res.sigma_over_omega = j["sigma_over_omega"];
    Analysis a = analyze_series(config, res.series);
    res.peaks = std::move(a.peaks);
    return res;
  }

  TimeSeries series = compute_series(config);
  Analysis a = analyze_series(config, series);
  res.dir = cache.publish(canonical, [&](const fs::path& tmp) {
    write_artifacts(config, series, a, tmp);
  });
  res.from_cache = false;
  res.breathing_freq_over_omega = a.freq_over_omega;
  res.sigma_over_omega = a.sigma_over_omega;
  res.peaks = std::move(a.peaks);
  res.series = std::move(series);
  return res;
}

std::optional<spectral::Peak> select_breathing_peak(const spectral::PeakSet& peaks,
                                                    double omega_post) {
  // candidates inside the lowest band, strongest first; degenerate fits on
  // sidelobe shoulders can report non-positive amplitudes and are skipped
  std::vector<spectral::Peak> cand;
  for (const auto& p : peaks.peaks) {
    const double f = p.center / omega_post;
    if (p.amplitude > 0.0 && f > 1.2 && f < 3.0) cand.push_back(p);
  }
  if (cand.empty()) return std::nullopt;
  const double amp_floor = 0.05 * cand.front().amplitude;
  std::vector<spectral::Peak> strong;
  for (const auto& p : cand)
    if (p.amplitude >= amp_floor) strong.push_back(p);
  if (strong.size() == 1) return strong.front();

  // two or more strong lines: the relative-motion line lies below the CM
  // line; keep the lower of the two strongest unless they are unresolved
  const spectral::Peak& a = strong[0];
  const spectral::Peak& b = strong[1];
  if (std::abs(a.center - b.center) < 1.5 * peaks.resolution) return a;
  return (a.center < b.center) ? a : b;
}

ContourTable sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.sweep_g.empty() || config.sweep_n.empty())
    throw config_error("sweep: sweep.g_values and sweep.n_values must be non-empty");

  struct Point {
    double g;
    int n;
  };
  std::vector<Point> points;
  for (double g : config.sweep_g)
    for (int n : config.sweep_n) points.push_back({g, n});

  // rough per-point budget so nobody launches a week-long sweep unwarned
  double est = 0.0;
  for (const auto& p : points) {
    if (config.engine == Engine::Gp)
      est += 0.5 + config.periods * 0.03;
    else {
      const int m = auto_orbitals(p.n, config.m_orbitals, config.dense_dim_max);
      const double dim = double(fewbody::FockBasis::dimension(p.n, m));
      est += 0.2 + 3e-9 * dim * dim * dim + 2e-7 * dim * dim;
    }
  }
  std::cerr << "sweep: " << points.size() << " points, rough estimate " << int(est)
            << " s on one worker\n";

  ContourTable table;
  table.rows.resize(points.size());
  std::mutex mtx;
  std::size_t next = 0;

  auto worker = [&]() {
    while (true) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= points.size()) return;
        idx = next++;
      }
      const Point pt = points[idx];
      ContourRow row;
      row.g = pt.g;
      row.n_particles = pt.n;
      row.engine = engine_name(config.engine);
      try {
        ExperimentConfig pc = config;
        pc.quench.g = pt.g;
        pc.quench.n_particles = pt.n;
        if (config.engine == Engine::Ed) {
          pc.m_orbitals = auto_orbitals(pt.n, config.m_orbitals, config.dense_dim_max);
          row.meta = "M=" + std::to_string(pc.m_orbitals);
        } else if (config.engine == Engine::Gp) {
          row.meta = "grid=" + std::to_string(pc.gp_grid_points);
        } else {
          row.meta = "max_quanta=" + std::to_string(pc.max_quanta);
        }
        RunResult r = run_experiment(pc);
        row.freq_over_omega = r.breathing_freq_over_omega;
        row.sigma_over_omega = r.sigma_over_omega;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      {
        std::lock_guard<std::mutex> lock(mtx);
        table.rows[idx] = row;
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(config.workers, int(points.size())));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::sort(table.rows.begin(), table.rows.end(), [](const ContourRow& a, const ContourRow& b) {
    if (a.g != b.g) return a.g < b.g;
    if (a.n_particles != b.n_particles) return a.n_particles < b.n_particles;
    return a.engine < b.engine;
  });
  return table;
}

void write_contour_csv(const ContourTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  out << "# version = " << kVersion << "\n";
  out << "g,n_particles,engine,freq_over_omega,sigma_over_omega,meta,error\n";
  for (const auto& r : table.rows)
    out << fmt(r.g) << "," << r.n_particles << "," << r.engine << ","
        << fmt(r.freq_over_omega) << "," << fmt(r.sigma_over_omega) << "," << r.meta
        << "," << r.error << "\n";
}

ContourTable read_contour_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open: " + path);
  ContourTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("g,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string f[7];
    for (int i = 0; i < 7 && std::getline(ss, f[i], ','); ++i) {}
    ContourRow row;
    row.g = std::stod(f[0]);
    row.n_particles = std::stoi(f[1]);
    row.engine = f[2];
    row.freq_over_omega = std::stod(f[3]);
    row.sigma_over_omega = std::stod(f[4]);
    row.meta = f[5];
    row.error = f[6];
    table.rows.push_back(row);
  }
  return table;
}

namespace {

// frequency at (g, n) by linear interpolation along the g-grid of that n
std::optional<double> interp_freq(const ContourTable& table, double g, int n) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : table.rows)
    if (r.n_particles == n && r.error.empty()) pts.emplace_back(r.g, r.freq_over_omega);
  if (pts.size() < 2) return std::nullopt;
  std::sort(pts.begin(), pts.end());
  if (g < pts.front().first - 1e-12 || g > pts.back().first + 1e-12) return std::nullopt;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (g <= pts[i].first + 1e-12) {
      const auto& [g0, f0] = pts[i - 1];
      const auto& [g1, f1] = pts[i];
      if (g1 == g0) return f0;
      const double w = (g - g0) / (g1 - g0);
      return f0 + w * (f1 - f0);
    }
  }
  return std::nullopt;
}

}  // namespace

OverlayTable gp_hyperbola_overlay(const ContourTable& table,
                                  const std::vector<double>& levels) {
  OverlayTable out;
  if (table.rows.empty()) return out;  // empty table -> empty overlay

  std::vector<int> n_values;
  for (const auto& r : table.rows)
    if (r.error.empty()) n_values.push_back(r.n_particles);
  std::sort(n_values.begin(), n_values.end());
  n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
  if (n_values.empty()) return out;
  const int n_right = n_values.back();

  for (double level : levels) {
    // anchor: find g* with freq(g*, n_right) = level on the right edge
    std::vector<std::pair<double, double>> edge;
    for (const auto& r : table.rows)
      if (r.n_particles == n_right && r.error.empty())
        edge.emplace_back(r.g, r.freq_over_omega);
    std::sort(edge.begin(), edge.end());
    if (edge.size() < 2) {
      out.notes.push_back("level " + fmt(level) + ": right edge has too few points");
      continue;
    }
    // frequency decreases with g in the studied regime; walk the segments
    std::optional<double> g_star;
    for (std::size_t i = 1; i < edge.size(); ++i) {
      const double f0 = edge[i - 1].second, f1 = edge[i].second;
      if ((level <= f0 && level >= f1) || (level >= f0 && level <= f1)) {
        const double w = (f0 == f1) ? 0.0 : (level - f0) / (f1 - f0);
        g_star = edge[i - 1].first + w * (edge[i].first - edge[i - 1].first);
        break;
      }
    }
    if (!g_star) {
      out.notes.push_back("level " + fmt(level) +
                          ": outside the frequency range of the right edge; skipped");
      continue;
    }
    const double c = *g_star * (n_right - 1);
    for (int n : n_values) {
      if (n < 2) continue;
      OverlayRow row;
      row.level = level;
      row.n_particles = n;
      row.g_hyperbola = c / (n - 1);
      auto f = interp_freq(table, row.g_hyperbola, n);
      row.deviation = f ? (*f - level) : std::numeric_limits<double>::quiet_NaN();
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_overlay_csv(const OverlayTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  out << "# version = " << kVersion << "\n";
  for (const auto& note : table.notes) out << "# note: " << note << "\n";
  out << "level,n_particles,g_hyperbola,deviation\n";
  for (const auto& r : table.rows)
    out << fmt(r.level) << "," << r.n_particles << "," << fmt(r.g_hyperbola) << ","
        << fmt(r.deviation) << "\n";
}

CouplingValidation validate_relative_coupling(const std::vector<double>& g_values,
                                              const std::vector<int>& m_values) {
  if (g_values.empty() || m_values.size() < 2)
    throw config_error("validate_relative_coupling: need g values and >= 2 orbital counts");

  CouplingValidation v;
  double score_sqrt2 = 0.0, score_plain = 0.0;
  for (double g : g_values) {
    trap::QuenchSpec spec{1.0, 1.0, g, 2};
    std::vector<double> energies;
    for (int m : m_values) {
      fewbody::FockBasis basis(2, m);
      auto h = fewbody::build_hamiltonian(basis, spec);
      energies.push_back(fewbody::ground_state(h).energy);
    }
    // contact interactions converge algebraically, E(M) ~ E_inf + c M^{-1/2};
    // extrapolate from the last two orbital counts
    const int m1 = m_values[m_values.size() - 2], m2 = m_values.back();
    const double e1 = energies[energies.size() - 2], e2 = energies.back();
    const double w1 = std::pow(double(m1), -0.5), w2 = std::pow(double(m2), -0.5);
    const double slope = (e1 - e2) / (w1 - w2);
    const double e_inf = e2 - slope * w2;
    const double envelope = 2.0 * std::abs(e2 - e_inf) + 1e-10;

    CouplingValidation::Point p;
    p.g = g;
    p.ed_extrapolated = e_inf;
    p.envelope = envelope;
    p.analytic_sqrt2 = 0.5 + busch::even_level_energy(busch::g_rel_from_lab(g), 0);
    p.analytic_plain = 0.5 + busch::even_level_energy(g, 0);
    v.points.push_back(p);

    score_sqrt2 += std::abs(e_inf - p.analytic_sqrt2);
    score_plain += std::abs(e_inf - p.analytic_plain);
  }
  v.sqrt2_wins = score_sqrt2 * 4.0 < score_plain;
  if (!v.sqrt2_wins) {
    std::string diag = "coupling validation failed:";
    for (const auto& p : v.points)
      diag += " [g=" + fmt(p.g) + " ed=" + fmt(p.ed_extrapolated) +
              " sqrt2=" + fmt(p.analytic_sqrt2) + " plain=" + fmt(p.analytic_plain) + "]";
    throw numeric_error(diag);
  }
  return v;
}

int auto_orbitals(int n_particles, int m_preferred, int dense_dim_max) {
  for (int m = m_preferred; m >= 2; --m) {
    if (fewbody::FockBasis::dimension(n_particles, m) <= std::size_t(dense_dim_max))
      return m;
  }
  return 2;
}

}  // namespace qbreathe::driver
