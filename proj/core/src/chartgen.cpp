#include "ecgraph/chartgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ecgraph/rng.hpp"

namespace ecgraph {

const char* wave_kind_name(WaveKind k) {
  switch (k) {
  case WaveKind::Sine: return "sine";
  case WaveKind::Square: return "square";
  case WaveKind::Composite: return "composite";
  case WaveKind::Mix: return "mix";
  }
  fail(Errc::UnknownOp, "bad wave kind");
}

WaveKind parse_wave_kind(const std::string& name) {
  if (name == "sine") return WaveKind::Sine;
  if (name == "square") return WaveKind::Square;
  if (name == "composite") return WaveKind::Composite;
  if (name == "mix") return WaveKind::Mix;
  fail(Errc::UnknownOp, "unknown waveform '" + name + "'");
}

int band_sample_count(const LeadBand& band, const CalibrationConfig& cal) {
  return int(std::floor(double(band.width() - 1) / cal.pixels_per_sample)) + 1;
}

double band_amplitude_limit_mv(const LeadBand& band, const CalibrationConfig& cal, int margin_px) {
  double half_rows = (band.row_bottom - band.row_top) / 2.0 - margin_px;
  if (half_rows < 1.0) half_rows = 1.0;
  return half_rows * cal.gain_mv_per_pixel;
}

namespace {

// All generated traces are mostly isoelectric, like real chart strips: the
// baseline row has to dominate the band's ink for mode-row baseline
// detection to land on it. Extremes are held for two samples; a one-sample
// apex falls between the column runs the renderer draws and cannot be read
// back exactly.

// Full sine cycles separated by flat stretches of comparable length.
std::vector<double> sine_wave(int n, double amp, Rng& rng) {
  std::vector<double> v(std::size_t(n), 0.0);
  int pos = 4 + int(rng.below(6));
  while (true) {
    int cyc = 32 + int(rng.below(17));
    int gap = cyc + int(rng.below(cyc));
    if (pos + cyc + 4 > n) break;
    double a = amp * rng.uniform(0.7, 1.0);
    for (int k = 0; k < cyc; ++k)
      v[std::size_t(pos + k)] = a * std::sin(2.0 * std::numbers::pi * k / double(cyc));
    pos += cyc + gap;
  }
  return v;
}

// Rectangular pulses of alternating sign, at most a third of the samples
// off baseline.
std::vector<double> square_wave(int n, double amp, Rng& rng) {
  std::vector<double> v(std::size_t(n), 0.0);
  int pos = 4 + int(rng.below(8));
  double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
  while (true) {
    int w = 6 + int(rng.below(7));
    int gap = 2 * w + int(rng.below(std::uint64_t(2 * w)));
    if (pos + w + 4 > n) break;
    double a = amp * rng.uniform(0.7, 1.0) * sign;
    for (int k = 0; k < w; ++k) v[std::size_t(pos + k)] = a;
    sign = -sign;
    pos += w + gap;
  }
  return v;
}

// Beat-like complexes: a rounded hump, a tall spike with a two-sample flat
// top, and an opposite hump, repeated on a flat baseline.
std::vector<double> composite_wave(int n, double amp, Rng& rng) {
  std::vector<double> v(std::size_t(n), 0.0);
  const int period = 50 + int(rng.below(31));
  const double hump = amp * rng.uniform(0.12, 0.25);
  const double tall = amp * rng.uniform(0.8, 1.0);
  auto bump = [&](int center, int halfwidth, double a) {
    for (int k = std::max(0, center - halfwidth + 1); k < std::min(n, center + halfwidth); ++k) {
      double c = std::cos(std::numbers::pi * (k - center) / double(halfwidth));
      v[std::size_t(k)] = a * 0.5 * (1.0 + c);
    }
  };
  const int head = 4 + int(rng.below(6));
  for (int s = head; s + period <= n; s += period) {
    bump(s + period / 4, period / 10, hump);
    const int c = s + period / 2;
    const int ramp = std::max(2, period / 18);
    for (int k = 1; k <= ramp; ++k) {
      double t = 1.0 - double(k) / double(ramp + 1);
      v[std::size_t(c - k)] = tall * t;
      v[std::size_t(c + 1 + k)] = tall * t;
    }
    v[std::size_t(c)] = tall;
    v[std::size_t(c + 1)] = tall;
    bump(s + 3 * period / 4, period / 8, -hump);
  }
  return v;
}

std::vector<double> lead_wave(WaveKind kind, int n, double limit, Rng& rng) {
  double amp = limit * rng.uniform(0.5, 0.95);
  switch (kind) {
  case WaveKind::Sine: return sine_wave(n, amp, rng);
  case WaveKind::Square: return square_wave(n, amp, rng);
  case WaveKind::Composite: return composite_wave(n, amp, rng);
  case WaveKind::Mix: break;
  }
  fail(Errc::UnknownOp, "mix resolves per lead before this point");
}

} // namespace

SignalRecord make_waveform_record(const LayoutConfig& layout, const CalibrationConfig& cal,
                                  WaveKind kind, std::uint64_t seed) {
  layout.validate();
  cal.validate();
  Rng rng = Rng::seeded(seed);
  constexpr WaveKind cycle[3] = {WaveKind::Sine, WaveKind::Square, WaveKind::Composite};
  SignalRecord rec;
  std::size_t i = 0;
  for (const auto& band : layout.bands) {
    WaveKind k = kind == WaveKind::Mix ? cycle[i % 3] : kind;
    Rng lead_rng = rng.fork(i + 1);
    rec.add(band.lead, lead_wave(k, band_sample_count(band, cal),
                                 band_amplitude_limit_mv(band, cal), lead_rng));
    ++i;
  }
  return rec;
}

CrossingChart make_crossing_record(const LayoutConfig& layout, const CalibrationConfig& cal,
                                   std::uint64_t seed) {
  layout.validate();
  cal.validate();
  Rng rng = Rng::seeded(seed);
  CrossingChart chart;

  // Group band indices by x_start; each group is one on-page column, top to
  // bottom in layout order.
  std::map<int, std::vector<std::size_t>> columns;
  for (std::size_t i = 0; i < layout.bands.size(); ++i)
    columns[layout.bands[i].x_start].push_back(i);

  std::vector<int> role(layout.bands.size(), 0); // 0 sine, 1 dipper, 2 target
  std::vector<std::size_t> partner(layout.bands.size(), 0);
  for (auto& [x0, idx] : columns)
    for (std::size_t r = 1; r + 1 < idx.size(); r += 3) {
      role[idx[r]] = 1;
      partner[idx[r]] = idx[r + 1];
      role[idx[r + 1]] = 2;
    }

  for (std::size_t i = 0; i < layout.bands.size(); ++i) {
    const auto& band = layout.bands[i];
    int n = band_sample_count(band, cal);
    Rng lead_rng = rng.fork(i + 1);
    if (role[i] == 1) {
      // Triangular dips whose lowest sample lands exactly on the baseline
      // row of the band below, so the two traces share pixels there.
      const auto& below = layout.bands[partner[i]];
      double depth_rows = std::lround(below.row_center()) - std::lround(band.row_center());
      double depth_mv = depth_rows * cal.gain_mv_per_pixel;
      std::vector<double> v(std::size_t(n), 0.0);
      int n_dips = 2 + int(lead_rng.below(2));
      int halfwidth = std::max(4, n / 24);
      for (int d = 0; d < n_dips; ++d) {
        int center = (n * (2 * d + 1)) / (2 * n_dips) + int(lead_rng.below(7)) - 3;
        center = std::clamp(center, halfwidth, n - 1 - halfwidth);
        for (int k = center - halfwidth; k <= center + halfwidth; ++k) {
          double tri = 1.0 - double(std::abs(k - center)) / double(halfwidth);
          v[std::size_t(k)] = std::min(v[std::size_t(k)], -depth_mv * tri);
        }
      }
      chart.record.add(band.lead, std::move(v));
      chart.dippers.push_back(band.lead);
    } else if (role[i] == 2) {
      chart.record.add(band.lead, std::vector<double>(std::size_t(n), 0.0));
      chart.targets.push_back(band.lead);
    } else {
      double amp = band_amplitude_limit_mv(band, cal) * lead_rng.uniform(0.3, 0.6);
      chart.record.add(band.lead, sine_wave(n, amp, lead_rng));
    }
  }
  return chart;
}

} // namespace ecgraph
