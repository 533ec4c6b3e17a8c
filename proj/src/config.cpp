#include "qbreathe/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbreathe/fock.hpp"

namespace qbreathe::driver {

namespace {

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "': not a number: '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "': not an integer: '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Analytic: return "analytic";
    case Engine::Ed: return "ed";
    case Engine::Gp: return "gp";
  }
  return "?";
}

Engine engine_from_name(const std::string& name) {
  if (name == "analytic") return Engine::Analytic;
  if (name == "ed") return Engine::Ed;
  if (name == "gp") return Engine::Gp;
  throw config_error("config: unknown engine '" + name + "' (analytic|ed|gp)");
}

void ExperimentConfig::validate() const {
  quench.validate();
  if (periods < 1) throw config_error("config: engine.periods must be >= 1");
  if (samples_per_period < 2)
    throw config_error("config: engine.samples_per_period must be >= 2");
  if (zero_pad < 1) throw config_error("config: spectral.zero_pad must be >= 1");
  if (!(min_prominence > 0.0 && min_prominence < 1.0))
    throw config_error("config: spectral.min_prominence must be in (0,1)");
  if (lorentz_window_bins < 5)
    throw config_error("config: spectral.lorentz_window_bins must be >= 5");
  if (workers < 1) throw config_error("config: sweep.workers must be >= 1");

  switch (engine) {
    case Engine::Ed: {
      if (m_orbitals < 1 || m_orbitals > trap::kMaxOrbitalIndex + 1)
        throw config_error("config: engine.m_orbitals out of range");
      const std::size_t dim =
          fewbody::FockBasis::dimension(quench.n_particles, m_orbitals);
      if (dim > basis_cap)
        throw config_error("config: Fock dimension " + std::to_string(dim) +
                           " exceeds engine.basis_cap " + std::to_string(basis_cap) +
                           "; reduce quench.n_particles or engine.m_orbitals");
      break;
    }
    case Engine::Analytic:
      if (quench.n_particles != 2)
        throw config_error("config: the analytic engine requires quench.n_particles = 2");
      if (max_quanta < 2 || max_quanta % 2 != 0)
        throw config_error("config: engine.max_quanta must be even and >= 2");
      break;
    case Engine::Gp:
      if (gp_grid_points < 64)
        throw config_error("config: engine.gp_grid_points must be >= 64");
      if (!(gp_dt_periods > 0.0 && gp_dt_periods <= 0.1))
        throw config_error("config: engine.gp_dt_periods must be in (0, 0.1]");
      break;
  }
}

namespace {

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& val) {
  if (key == "quench.omega_pre") c.quench.omega_pre = to_double(key, val);
  else if (key == "quench.omega_post") c.quench.omega_post = to_double(key, val);
  else if (key == "quench.g") c.quench.g = to_double(key, val);
  else if (key == "quench.n_particles") c.quench.n_particles = int(to_long(key, val));
  else if (key == "engine.type") c.engine = engine_from_name(val);
  else if (key == "engine.m_orbitals") c.m_orbitals = int(to_long(key, val));
  else if (key == "engine.basis_cap") c.basis_cap = std::size_t(to_long(key, val));
  else if (key == "engine.dense_dim_max") c.dense_dim_max = int(to_long(key, val));
  else if (key == "engine.krylov_tol") c.krylov_tol = to_double(key, val);
  else if (key == "engine.krylov_dim") c.krylov_dim = int(to_long(key, val));
  else if (key == "engine.periods") c.periods = int(to_long(key, val));
  else if (key == "engine.samples_per_period") c.samples_per_period = int(to_long(key, val));
  else if (key == "engine.max_quanta") c.max_quanta = int(to_long(key, val));
  else if (key == "engine.gp_grid_points") c.gp_grid_points = int(to_long(key, val));
  else if (key == "engine.gp_extent") c.gp_extent = to_double(key, val);
  else if (key == "engine.gp_dt_periods") c.gp_dt_periods = to_double(key, val);
  else if (key == "spectral.window") {
    if (val == "hann") c.window = spectral::Window::Hann;
    else if (val == "none") c.window = spectral::Window::None;
    else throw config_error("config: spectral.window must be hann or none");
  }
  else if (key == "spectral.zero_pad") c.zero_pad = int(to_long(key, val));
  else if (key == "spectral.min_prominence") c.min_prominence = to_double(key, val);
  else if (key == "spectral.lorentz_window_bins") c.lorentz_window_bins = int(to_long(key, val));
  else if (key == "sweep.g_values") {
    c.sweep_g.clear();
    for (const auto& s : split_list(val)) c.sweep_g.push_back(to_double(key, s));
  }
  else if (key == "sweep.n_values") {
    c.sweep_n.clear();
    for (const auto& s : split_list(val)) c.sweep_n.push_back(int(to_long(key, s)));
  }
  else if (key == "sweep.workers") c.workers = int(to_long(key, val));
  else if (key == "output.dir") c.output_dir = val;
  else if (key == "output.cache_dir") c.cache_dir = val;
  else throw config_error("config: unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config: malformed section at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: expected key = value at line " + std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    apply_key(cfg, key, val);
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw config_error("config: override must look like section.key=value, got '" +
                       assignment + "'");
  apply_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string canonical_text(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("engine.type", engine_name(c.engine));
  kv.emplace_back("quench.omega_pre", fmt(c.quench.omega_pre));
  kv.emplace_back("quench.omega_post", fmt(c.quench.omega_post));
  kv.emplace_back("quench.g", fmt(c.quench.g));
  kv.emplace_back("quench.n_particles", std::to_string(c.quench.n_particles));
  kv.emplace_back("engine.periods", std::to_string(c.periods));
  kv.emplace_back("engine.samples_per_period", std::to_string(c.samples_per_period));
  switch (c.engine) {
    case Engine::Ed:
      kv.emplace_back("engine.m_orbitals", std::to_string(c.m_orbitals));
      kv.emplace_back("engine.dense_dim_max", std::to_string(c.dense_dim_max));
      kv.emplace_back("engine.krylov_tol", fmt(c.krylov_tol));
      kv.emplace_back("engine.krylov_dim", std::to_string(c.krylov_dim));
      break;
    case Engine::Analytic:
      kv.emplace_back("engine.max_quanta", std::to_string(c.max_quanta));
      break;
    case Engine::Gp:
      kv.emplace_back("engine.gp_grid_points", std::to_string(c.gp_grid_points));
      kv.emplace_back("engine.gp_extent", fmt(c.gp_extent));
      kv.emplace_back("engine.gp_dt_periods", fmt(c.gp_dt_periods));
      break;
  }
  kv.emplace_back("spectral.window",
                  c.window == spectral::Window::Hann ? "hann" : "none");
  kv.emplace_back("spectral.zero_pad", std::to_string(c.zero_pad));
  kv.emplace_back("spectral.min_prominence", fmt(c.min_prominence));
  kv.emplace_back("spectral.lorentz_window_bins", std::to_string(c.lorentz_window_bins));
  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

}  // namespace qbreathe::driver
