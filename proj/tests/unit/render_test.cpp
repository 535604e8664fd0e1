#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "ecgraph/chartgen.hpp"
#include "ecgraph/errors.hpp"
#include "ecgraph/image_io.hpp"
#include "ecgraph/render.hpp"
#include "helpers.hpp"

using namespace ecgraph;

namespace {

LayoutConfig small_layout() { return make_standard_layout(80, 40, 10, 20, 2); }

RenderConfig base_config() {
  RenderConfig cfg;
  cfg.layout = small_layout();
  cfg.grid_spacing_px = 10;
  return cfg;
}

std::size_t mask_union_mismatches(const RenderResult& r, const LayoutConfig& layout) {
  BinaryRaster ink = binarize(r.image, layout);
  std::size_t bad = 0;
  for (int y = 0; y < ink.height(); ++y)
    for (int x = 0; x < ink.width(); ++x) {
      bool in_any = false;
      for (const auto& [lead, mask] : r.masks)
        if (mask.get(x, y)) { in_any = true; break; }
      if (in_any != ink.get(x, y)) ++bad;
    }
  return bad;
}

} // namespace

TEST_SUITE("render") {

  TEST_CASE("binarized page ink equals the union of the lead masks") {
    RenderConfig cfg = base_config();
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Mix, 7);
    RenderResult r = render_record(rec, cfg);
    CHECK(mask_union_mismatches(r, cfg.layout) == 0);
    for (const auto& [lead, mask] : r.masks) CHECK(mask.count() > 0);
  }

  TEST_CASE("baseline rows sit at the band centers") {
    RenderConfig cfg = base_config();
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Sine, 3);
    RenderResult r = render_record(rec, cfg);
    for (const auto& band : cfg.layout.bands) {
      REQUIRE(r.baselines.count(band.lead) == 1);
      CHECK(r.baselines.at(band.lead) == static_cast<int>(std::lround(band.row_center())));
    }
  }

  TEST_CASE("every column of a band carries ink from start to end") {
    RenderConfig cfg = base_config();
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Composite, 11);
    RenderResult r = render_record(rec, cfg);
    for (const auto& band : cfg.layout.bands) {
      const BinaryRaster& mask = r.masks.at(band.lead);
      for (int x = band.x_start; x <= band.x_end; ++x) {
        bool any = false;
        for (int y = 0; y < mask.height() && !any; ++y) any = mask.get(x, y);
        CHECK_MESSAGE(any, "empty column ", x, " in lead ", lead_name(band.lead));
        if (!any) return;
      }
    }
  }

  TEST_CASE("crossing pages report overlapping lead pairs with exact shared counts") {
    RenderConfig cfg = base_config();
    CrossingChart chart = make_crossing_record(cfg.layout, cfg.cal, 19);
    RenderResult r = render_record(chart.record, cfg);
    REQUIRE_FALSE(r.crossings.empty());
    REQUIRE_FALSE(chart.dippers.empty());
    for (const auto& [a, b, n] : r.crossings) {
      CHECK(a < b); // one entry per unordered pair
      CHECK(n > 0);
      const BinaryRaster& ma = r.masks.at(a);
      const BinaryRaster& mb = r.masks.at(b);
      long shared = 0;
      for (int y = 0; y < ma.height(); ++y)
        for (int x = 0; x < ma.width(); ++x)
          if (ma.get(x, y) && mb.get(x, y)) ++shared;
      CHECK(shared == n);
    }
    // every dip lands on its flat neighbor
    for (Lead d : chart.dippers) {
      bool seen = false;
      for (const auto& [a, b, n] : r.crossings) seen = seen || a == d || b == d;
      CHECK_MESSAGE(seen, "dipper ", lead_name(d), " produced no crossing");
    }
  }

  TEST_CASE("in-band pages report no crossings") {
    RenderConfig cfg = base_config();
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Mix, 23);
    RenderResult r = render_record(rec, cfg);
    CHECK(r.crossings.empty());
  }

  TEST_CASE("leaving the band rows is an error when crossings are disallowed") {
    RenderConfig cfg = base_config();
    cfg.allow_crossings = false;
    CrossingChart chart = make_crossing_record(cfg.layout, cfg.cal, 19);
    CHECK_THROWS_AS(render_record(chart.record, cfg), Error);
    try {
      render_record(chart.record, cfg);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BandOverflow);
    }
  }

  TEST_CASE("thicker lines contain the thin trace") {
    RenderConfig thin = base_config();
    SignalRecord rec = make_waveform_record(thin.layout, thin.cal, WaveKind::Square, 5);
    RenderConfig thick = thin;
    thick.line_thickness = 3;
    RenderResult r1 = render_record(rec, thin);
    RenderResult r3 = render_record(rec, thick);
    for (const auto& [lead, m1] : r1.masks) {
      const BinaryRaster& m3 = r3.masks.at(lead);
      CHECK(m3.count() > m1.count());
      for (int y = 0; y < m1.height(); ++y)
        for (int x = 0; x < m1.width(); ++x)
          if (m1.get(x, y)) CHECK(m3.get(x, y));
    }
  }

  TEST_CASE("antialias puts a light halo in the image but never in the masks") {
    RenderConfig cfg = base_config();
    cfg.antialias = true;
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Sine, 9);
    RenderResult r = render_record(rec, cfg);

    // halo pixels exist: non-white, non-ink, adjacent to a mask pixel
    std::size_t halo = 0;
    for (const auto& [lead, mask] : r.masks) {
      for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
          if (mask.get(x, y)) continue;
          bool near_ink = false;
          for (int dy = -1; dy <= 1 && !near_ink; ++dy)
            for (int dx = -1; dx <= 1 && !near_ink; ++dx)
              near_ink = mask.in_bounds(x + dx, y + dy) && mask.get(x + dx, y + dy);
          if (!near_ink) continue;
          Rgb c = r.image.at(x, y);
          if (c == Rgb{255, 255, 255}) continue;
          if (luminance(c) > cfg.layout.ink_luminance_threshold) ++halo;
        }
    }
    CHECK(halo > 0);
    // the halo stays above the ink threshold, so binarize still sees only the trace
    CHECK(mask_union_mismatches(r, cfg.layout) == 0);
  }

  TEST_CASE("rendering is deterministic for a fixed record and config") {
    RenderConfig cfg = base_config();
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Mix, 31);
    RenderResult a = render_record(rec, cfg);
    RenderResult b = render_record(rec, cfg);
    CHECK(a.image.pixels() == b.image.pixels());
    for (const auto& [lead, mask] : a.masks) CHECK(mask.count() == b.masks.at(lead).count());
  }

  TEST_CASE("saved ground truth round-trips") {
    const std::string dir = test::temp_dir("render");
    RenderConfig cfg = base_config();
    cfg.rng_seed = 42;
    SignalRecord rec = make_waveform_record(cfg.layout, cfg.cal, WaveKind::Mix, 42);
    RenderResult r = render_record(rec, cfg);
    save_render(r, rec, cfg, dir, "page");

    RenderTruth t = load_render_truth(dir + "/page.truth.json");
    CHECK(t.seed == 42);
    CHECK(t.sample_rate_hz == cfg.cal.sample_rate_hz);
    CHECK(t.gain_mv_per_pixel == cfg.cal.gain_mv_per_pixel);
    CHECK(t.pixels_per_sample == cfg.cal.pixels_per_sample);
    CHECK(t.baselines == r.baselines);
    CHECK(t.crossings == r.crossings);
    // full deep equality: lead order and exact sample values both round-trip
    CHECK(t.signals.leads() == rec.leads());
    for (const auto& [lead, file] : t.mask_files) {
      BinaryRaster m = load_mask_png(dir + "/" + file);
      const BinaryRaster& orig = r.masks.at(lead);
      REQUIRE(m.width() == orig.width());
      REQUIRE(m.height() == orig.height());
      std::size_t diff = 0;
      for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
          if (m.get(x, y) != orig.get(x, y)) ++diff;
      CHECK(diff == 0);
    }
    RasterImage page = load_image(dir + "/page.png");
    CHECK(page.pixels() == r.image.pixels());
  }

  TEST_CASE("config validation rejects bad values") {
    RenderConfig cfg = base_config();
    cfg.line_thickness = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = base_config();
    cfg.cal.pixels_per_sample = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}
