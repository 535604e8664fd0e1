#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "ecgraph/chartgen.hpp"
#include "ecgraph/errors.hpp"
#include "helpers.hpp"

using namespace ecgraph;

namespace {

LayoutConfig small_layout() { return make_standard_layout(80, 40, 10, 20, 2); }

} // namespace

TEST_SUITE("chartgen") {

  TEST_CASE("wave kind names round-trip and bad names throw") {
    for (WaveKind k : {WaveKind::Sine, WaveKind::Square, WaveKind::Composite, WaveKind::Mix})
      CHECK(parse_wave_kind(wave_kind_name(k)) == k);
    CHECK_THROWS_AS(parse_wave_kind("triangle"), Error);
  }

  TEST_CASE("band sample count matches the columns the renderer uses") {
    LeadBand band;
    band.x_start = 0;
    band.x_end = 79; // width 80
    CalibrationConfig cal;
    cal.pixels_per_sample = 2.0;
    // last sample column: 0 + round(39 * 2) = 78 <= 79, one more would be 80
    CHECK(band_sample_count(band, cal) == 40);
    cal.pixels_per_sample = 1.0;
    CHECK(band_sample_count(band, cal) == 80);
    cal.pixels_per_sample = 3.0;
    CHECK(band_sample_count(band, cal) == 27); // round(26*3)=78, round(27*3)=81
  }

  TEST_CASE("amplitude limit keeps a margin inside the band rows") {
    LeadBand band;
    band.row_top = 10;
    band.row_bottom = 50; // half-height 20
    CalibrationConfig cal;
    cal.gain_mv_per_pixel = 0.01;
    CHECK(band_amplitude_limit_mv(band, cal, 4) == doctest::Approx(0.16));
    CHECK(band_amplitude_limit_mv(band, cal, 19) == doctest::Approx(0.01)); // floor at one row
  }

  TEST_CASE("waveform records cover every band with in-limit samples") {
    LayoutConfig layout = small_layout();
    CalibrationConfig cal;
    for (WaveKind k : {WaveKind::Sine, WaveKind::Square, WaveKind::Composite, WaveKind::Mix}) {
      SignalRecord rec = make_waveform_record(layout, cal, k, 5);
      REQUIRE(rec.leads().size() == layout.bands.size());
      for (const auto& band : layout.bands) {
        REQUIRE(rec.has(band.lead));
        const auto& v = rec.samples(band.lead);
        CHECK(v.size() == std::size_t(band_sample_count(band, cal)));
        double limit = band_amplitude_limit_mv(band, cal);
        for (double s : v) CHECK(std::abs(s) <= limit + 1e-12);
        CHECK(v.front() == 0.0); // flat head before the first deflection
      }
    }
  }

  TEST_CASE("most samples sit on the baseline") {
    // Mode-row baseline detection needs the zero row to dominate.
    LayoutConfig layout = small_layout();
    CalibrationConfig cal;
    SignalRecord rec = make_waveform_record(layout, cal, WaveKind::Mix, 77);
    for (const auto& [lead, v] : rec.leads()) {
      (void)lead;
      std::size_t zeros = std::size_t(std::count(v.begin(), v.end(), 0.0));
      CHECK(zeros * 2 > v.size());
    }
  }

  TEST_CASE("records are seed-deterministic") {
    LayoutConfig layout = small_layout();
    CalibrationConfig cal;
    SignalRecord a = make_waveform_record(layout, cal, WaveKind::Mix, 123);
    SignalRecord b = make_waveform_record(layout, cal, WaveKind::Mix, 123);
    SignalRecord c = make_waveform_record(layout, cal, WaveKind::Mix, 124);
    CHECK(a.leads() == b.leads());
    CHECK(a.leads() != c.leads());
  }

  TEST_CASE("crossing charts pair each dipper with the flat band below it") {
    LayoutConfig layout = small_layout();
    CalibrationConfig cal;
    CrossingChart chart = make_crossing_record(layout, cal, 9);
    REQUIRE_FALSE(chart.dippers.empty());
    REQUIRE(chart.dippers.size() == chart.targets.size());
    for (std::size_t i = 0; i < chart.dippers.size(); ++i) {
      const auto& dv = chart.record.samples(chart.dippers[i]);
      const auto& tv = chart.record.samples(chart.targets[i]);
      // target is flat at its own baseline
      CHECK(std::all_of(tv.begin(), tv.end(), [](double s) { return s == 0.0; }));
      // dip bottom reaches the target row: depth equals the row distance
      const LeadBand& db = *std::find_if(layout.bands.begin(), layout.bands.end(),
                                         [&](const LeadBand& b) { return b.lead == chart.dippers[i]; });
      const LeadBand& tb = *std::find_if(layout.bands.begin(), layout.bands.end(),
                                         [&](const LeadBand& b) { return b.lead == chart.targets[i]; });
      double depth_rows = std::lround(tb.row_center()) - std::lround(db.row_center());
      double min_v = *std::min_element(dv.begin(), dv.end());
      CHECK(min_v == doctest::Approx(-depth_rows * cal.gain_mv_per_pixel));
    }
  }

  TEST_CASE("crossing charts are seed-deterministic") {
    LayoutConfig layout = small_layout();
    CalibrationConfig cal;
    CrossingChart a = make_crossing_record(layout, cal, 55);
    CrossingChart b = make_crossing_record(layout, cal, 55);
    CHECK(a.dippers == b.dippers);
    CHECK(a.record.leads() == b.record.leads());
  }

  TEST_CASE("generated pages digitize back within two gain units") {
    LayoutConfig layout = small_layout();
    CalibrationConfig cal;
    RenderConfig cfg;
    cfg.layout = layout;
    cfg.cal = cal;
    cfg.grid_spacing_px = 10;
    SignalRecord rec = make_waveform_record(layout, cal, WaveKind::Mix, 2026);
    RenderResult r = render_record(rec, cfg);
    PageResult out = digitize_page(r.image, layout, cal);
    REQUIRE(out.all_ok());
    for (const auto& band : layout.bands) {
      const auto& truth = rec.samples(band.lead);
      const auto& got = out.record.samples(band.lead);
      REQUIRE(got.size() == truth.size());
      double worst = 0.0;
      for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - truth[i]));
      CHECK(worst <= 2.0 * cal.gain_mv_per_pixel);
    }
  }
}
