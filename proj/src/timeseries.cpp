#include "qbreathe/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbreathe/common.hpp"

namespace qbreathe {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void TimeSeries::add_meta(const std::string& key, double value) {
  provenance.emplace_back(key, format_double(value));
}

void TimeSeries::add_meta(const std::string& key, const std::string& value) {
  provenance.emplace_back(key, value);
}

void TimeSeries::validate() const {
  if (!(dt > 0.0)) throw config_error("time series: dt must be > 0");
  if (count() < 64) throw config_error("time series: need at least 64 samples");
}

void write_series_csv(const TimeSeries& ts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  for (const auto& [k, v] : ts.provenance) out << "# " << k << " = " << v << "\n";
  out << "# t0 = " << format_double(ts.t0) << "\n";
  out << "# dt = " << format_double(ts.dt) << "\n";
  out << "t,x2\n";
  for (int i = 0; i < ts.count(); ++i)
    out << format_double(ts.time_at(i)) << "," << format_double(ts.samples[i]) << "\n";
  if (!out) throw config_error("write failed: " + path);
}

TimeSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open: " + path);
  TimeSeries ts;
  bool have_t0 = false, have_dt = false;
  std::string line;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      std::string val = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
      };
      trim(key);
      trim(val);
      if (key == "t0") { ts.t0 = std::stod(val); have_t0 = true; }
      else if (key == "dt") { ts.dt = std::stod(val); have_dt = true; }
      else ts.provenance.emplace_back(key, val);
      continue;
    }
    if (line.rfind("t,", 0) == 0) continue;  // column header
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) continue;
    times.push_back(std::stod(a));
    ts.samples.push_back(std::stod(b));
  }
  if (ts.samples.empty()) throw config_error("no samples in " + path);
  if (!have_t0 || !have_dt) {
    // fall back to the time column
    ts.t0 = times.front();
    ts.dt = times.size() > 1 ? (times[1] - times[0]) : 0.0;
  }
  return ts;
}

}  // namespace qbreathe
