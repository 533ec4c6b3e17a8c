#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qbreathe {

// Uniformly sampled real observable with its parameter provenance.
// provenance is an ordered key/value list so file output is deterministic.
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> samples;
  std::vector<std::pair<std::string, std::string>> provenance;

  int count() const { return int(samples.size()); }
  double time_at(int i) const { return t0 + dt * i; }
  double duration() const { return dt * samples.size(); }

  void add_meta(const std::string& key, double value);
  void add_meta(const std::string& key, const std::string& value);

  void validate() const;  // dt > 0, count >= 64
};

// CSV with '#'-prefixed provenance header, columns t,x2.
void write_series_csv(const TimeSeries& ts, const std::string& path);
TimeSeries read_series_csv(const std::string& path);

}  // namespace qbreathe
