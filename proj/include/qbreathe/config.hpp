#pragma once

#include <string>
#include <vector>

#include "qbreathe/spectral.hpp"
#include "qbreathe/trap_model.hpp"

// Line-based "key = value" configuration with [sections]; '#' starts a
// comment.  Keys are addressed as section.key.  Unknown keys are errors so
// typos never silently fall back to defaults.

namespace qbreathe::driver {

enum class Engine { Analytic, Ed, Gp };

std::string engine_name(Engine e);
Engine engine_from_name(const std::string& name);

struct ExperimentConfig {
  trap::QuenchSpec quench{1.0, 0.9486832980505137996, 0.0, 2};
  Engine engine = Engine::Ed;

  // ed engine
  int m_orbitals = 11;
  std::size_t basis_cap = 2'000'000;
  int dense_dim_max = 4000;
  double krylov_tol = 1e-10;
  int krylov_dim = 40;

  // run length (ed / analytic / gp)
  int periods = 200;
  int samples_per_period = 32;

  // analytic engine
  int max_quanta = 20;

  // gp engine
  int gp_grid_points = 1024;
  double gp_extent = 0.0;  // 0 -> auto
  double gp_dt_periods = 1e-3;

  // spectral pipeline
  spectral::Window window = spectral::Window::Hann;
  int zero_pad = 4;
  double min_prominence = 0.05;
  int lorentz_window_bins = 13;

  // sweep grids
  std::vector<double> sweep_g;
  std::vector<int> sweep_n;
  int workers = 2;

  // paths (not part of the cache key)
  std::string output_dir = "out";
  std::string cache_dir = ".qbreathe-cache";

  void validate() const;
};

// Parse a config file / raw text into a resolved config (defaults + file).
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Apply one "section.key=value" override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Canonical serialization of every computation-relevant key, sorted; the
// cache key is a hash of this text.
std::string canonical_text(const ExperimentConfig& cfg);

}  // namespace qbreathe::driver
