#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "qbreathe/spectral.hpp"

using namespace qbreathe;
using namespace qbreathe::spectral;

namespace {

TimeSeries make_series(double dt, int count, const std::function<double(double)>& f) {
  TimeSeries ts;
  ts.t0 = 0.0;
  ts.dt = dt;
  ts.samples.resize(count);
  for (int i = 0; i < count; ++i) ts.samples[i] = f(dt * i);
  return ts;
}

// 200 periods of cos(w t) at 32 samples per period
TimeSeries cosine_series(double w, int periods = 200, int spp = 32, double amp = 1.0,
                         double offset = 0.0) {
  const double dt = 2.0 * M_PI / w / spp;
  return make_series(dt, periods * spp,
                     [=](double t) { return offset + amp * std::cos(w * t); });
}

}  // namespace

TEST_CASE("parseval identity without window or padding") {
  TimeSeries ts = cosine_series(2.0, 50, 32, 0.7, 3.0);
  // add a second tone so the spectrum is not a single bin
  for (int i = 0; i < ts.count(); ++i) ts.samples[i] += 0.2 * std::sin(1.3 * ts.time_at(i));

  SpectrumOptions opt;
  opt.window = Window::None;
  opt.zero_pad_factor = 1;
  Spectrum spec = power_spectrum(ts, opt);

  double mean = 0.0;
  for (double v : ts.samples) mean += v;
  mean /= ts.count();
  double time_energy = 0.0;
  for (double v : ts.samples) time_energy += (v - mean) * (v - mean) * ts.dt;

  const int n = ts.count();
  double spec_energy = 0.0;
  for (int k = 0; k < spec.size(); ++k) {
    const double coef = (k == 0 || (n % 2 == 0 && k == n / 2)) ? 1.0 : 2.0;
    spec_energy += coef * spec.magnitude[k] * spec.magnitude[k];
  }
  spec_energy *= spec.domega / (2.0 * M_PI);
  CHECK(spec_energy == doctest::Approx(time_energy).epsilon(1e-8));
}

TEST_CASE("constant series has no peaks") {
  TimeSeries ts = make_series(0.1, 256, [](double) { return 4.2; });
  Spectrum spec = power_spectrum(ts, {});
  CHECK(find_peaks(spec, 0.05).empty());
}

TEST_CASE("single tone lands within one bin and fits to resolution") {
  TimeSeries ts = cosine_series(2.0);
  Spectrum spec = power_spectrum(ts, {});
  auto peaks = find_peaks(spec, 0.05);
  REQUIRE(peaks.size() == 1);
  CHECK(std::abs(peaks[0].omega - 2.0) <= spec.resolution());

  LorentzFit fit = fit_lorentzian(spec, peaks[0].bin);
  CHECK(std::abs(fit.center - 2.0) < spec.resolution());
  CHECK(fit.sigma >= spec.resolution());
}

TEST_CASE("two-tone separation") {
  const double w = 2.0;
  TimeSeries ts = cosine_series(w, 400, 32);
  for (int i = 0; i < ts.count(); ++i)
    ts.samples[i] += 0.3 * std::cos(1.8 * ts.time_at(i));
  Spectrum spec = power_spectrum(ts, {});
  auto peaks = find_peaks(spec, 0.05);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].omega == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(peaks[1].omega == doctest::Approx(1.8).epsilon(1e-3));
}

TEST_CASE("lorentzian recovers a synthetic center off the bin grid") {
  // build a spectrum-like object directly from the model
  Spectrum spec;
  spec.dt = 0.1;
  spec.n_samples = 4096;
  spec.domega = 0.004;
  spec.magnitude.resize(2048);
  const double c = 1.93, gamma = 0.03, amp = 2.5;
  for (int k = 0; k < 2048; ++k) {
    const double w = spec.omega_at(k);
    spec.magnitude[k] = amp * gamma * gamma / ((w - c) * (w - c) + gamma * gamma);
  }
  const int bin = int(std::lround(c / spec.domega));
  LorentzFit fit = fit_lorentzian(spec, bin, 15);
  CHECK(std::abs(fit.center - c) < 0.1 * spec.domega);
  CHECK(fit.half_width == doctest::Approx(gamma).epsilon(0.02));
  CHECK(!fit.flagged);
}

TEST_CASE("sine fit") {
  SUBCASE("clean tone to 1e-6") {
    TimeSeries ts = cosine_series(1.87, 100, 32, 0.1, 5.0);
    SineFit fit = fit_sine(ts);
    CHECK(std::abs(fit.frequency - 1.87) < 1e-6);
    CHECK(fit.amplitude == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(fit.offset == doctest::Approx(5.0).epsilon(1e-8));
  }
  SUBCASE("two-tone input is rejected") {
    TimeSeries ts = cosine_series(2.0, 100, 32);
    for (int i = 0; i < ts.count(); ++i)
      ts.samples[i] += 0.5 * std::cos(1.7 * ts.time_at(i));
    CHECK_THROWS_AS(fit_sine(ts), numeric_error);
  }
}

TEST_CASE("frequency estimates are offset and scale invariant") {
  TimeSeries base = cosine_series(1.93, 150, 32, 0.4, 0.0);
  TimeSeries shifted = base;
  for (auto& v : shifted.samples) v = 7.5 + 3.0 * v;

  Spectrum sa = power_spectrum(base, {});
  Spectrum sb = power_spectrum(shifted, {});
  auto pa = find_peaks(sa, 0.05);
  auto pb = find_peaks(sb, 0.05);
  REQUIRE(pa.size() == 1);
  REQUIRE(pb.size() == 1);
  const double ca = fit_lorentzian(sa, pa[0].bin).center;
  const double cb = fit_lorentzian(sb, pb[0].bin).center;
  CHECK(ca == doctest::Approx(cb).epsilon(1e-12));

  CHECK(fit_sine(base).frequency == doctest::Approx(fit_sine(shifted).frequency).epsilon(1e-10));
}

TEST_CASE("zero padding moves bins, not fitted centers") {
  TimeSeries ts = cosine_series(2.13, 200, 32, 1.0, 0.0);
  double centers[2];
  int pads[2] = {2, 8};
  for (int i = 0; i < 2; ++i) {
    SpectrumOptions opt;
    opt.zero_pad_factor = pads[i];
    Spectrum spec = power_spectrum(ts, opt);
    auto peaks = find_peaks(spec, 0.05);
    REQUIRE(!peaks.empty());
    centers[i] = fit_lorentzian(spec, peaks[0].bin).center;
  }
  CHECK(std::abs(centers[0] - centers[1]) < 0.2 * 2.0 * M_PI / (ts.count() * ts.dt));
}

TEST_CASE("sine and lorentzian agree for a pure tone") {
  TimeSeries ts = cosine_series(2.0, 200, 32, 0.5, 1.0);
  Spectrum spec = power_spectrum(ts, {});
  auto peaks = find_peaks(spec, 0.05);
  REQUIRE(!peaks.empty());
  const double lc = fit_lorentzian(spec, peaks[0].bin).center;
  const double sc = fit_sine(ts).frequency;
  CHECK(std::abs(lc - sc) < spec.resolution());
}

TEST_CASE("series csv round trip") {
  TimeSeries ts = cosine_series(2.0, 4, 32, 0.5, 1.0);
  ts.add_meta("engine", "test");
  ts.add_meta("g", 1.25);
  const std::string path = "/tmp/qbreathe_test_series.csv";
  write_series_csv(ts, path);
  TimeSeries back = read_series_csv(path);
  REQUIRE(back.count() == ts.count());
  CHECK(back.dt == doctest::Approx(ts.dt).epsilon(1e-15));
  for (int i = 0; i < ts.count(); ++i)
    CHECK(back.samples[i] == doctest::Approx(ts.samples[i]).epsilon(1e-15));
  bool saw_engine = false;
  for (const auto& [k, v] : back.provenance)
    if (k == "engine" && v == "test") saw_engine = true;
  CHECK(saw_engine);
}
