#include "ecgraph/render.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ecgraph/image_io.hpp"
#include "ecgraph/signal_io.hpp"

namespace ecgraph {

using nlohmann::json;

void RenderConfig::validate() const {
  layout.validate();
  cal.validate();
  if (line_thickness < 1) fail(Errc::ConfigShapeMismatch, "line_thickness must be >= 1");
  for (const auto& [lead, d] : drift)
    if (d.amplitude_mv < 0) fail(Errc::ConfigShapeMismatch, "drift amplitude must be >= 0");
}

namespace {

constexpr Rgb kInk{0, 0, 0};
constexpr Rgb kHalo{170, 170, 170};

void draw_grid(RasterImage& img, const LayoutConfig& layout, int spacing) {
  if (spacing <= 0) return;
  const Region& roi = layout.roi;
  for (int y = roi.y1; y <= roi.y2; ++y)
    for (int x = roi.x1; x <= roi.x2; ++x)
      if ((x - roi.x1) % spacing == 0 || (y - roi.y1) % spacing == 0)
        img.set(x, y, layout.grid_color);
}

struct ColumnRun {
  int lo, hi; // inclusive rows
};

} // namespace

RenderResult render_record(const SignalRecord& rec, const RenderConfig& cfg) {
  cfg.validate();
  if (rec.empty()) fail(Errc::EmptyTrace, "record has no leads to render");

  const LayoutConfig& layout = cfg.layout;
  const CalibrationConfig& cal = cfg.cal;
  const double p = cal.gain_mv_per_pixel;
  const double pps = cal.pixels_per_sample;

  RenderResult out;
  out.image = RasterImage(layout.page_width, layout.page_height, Rgb{255, 255, 255});
  draw_grid(out.image, layout, cfg.grid_spacing_px);

  const int up = (cfg.line_thickness - 1) - (cfg.line_thickness - 1) / 2;
  const int down = (cfg.line_thickness - 1) / 2;

  for (const auto& [lead, samples] : rec.leads()) {
    const LeadBand& band = layout.band_of(lead);
    const int n = static_cast<int>(samples.size());
    if (n < 2) fail(Errc::ConfigShapeMismatch, std::string("lead ") + lead_name(lead) + " has fewer than 2 samples");
    const int last_col = band.x_start + static_cast<int>(std::llround((n - 1) * pps));
    if (last_col > band.x_end)
      fail(Errc::ConfigShapeMismatch, std::string("lead ") + lead_name(lead) +
                                          ": record length exceeds band width at this calibration");

    const int baseline = static_cast<int>(std::lround(band.row_center()));
    out.baselines[lead] = baseline;

    DriftSpec drift;
    if (auto it = cfg.drift.find(lead); it != cfg.drift.end()) drift = it->second;

    // Real-valued path per column: sample values (plus wander) interpolated
    // linearly between sample columns, then converted to rows.
    const int width = last_col - band.x_start + 1;
    std::vector<double> path(static_cast<std::size_t>(width));
    std::vector<int> sample_col(static_cast<std::size_t>(n));
    std::vector<double> sample_y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      sample_col[static_cast<std::size_t>(i)] = static_cast<int>(std::llround(i * pps));
      double v = samples[static_cast<std::size_t>(i)];
      if (drift.period_s > 0 && drift.amplitude_mv > 0) {
        const double t = i / cal.sample_rate_hz;
        v += drift.amplitude_mv * std::sin(2.0 * std::numbers::pi * t / drift.period_s + drift.phase);
      }
      sample_y[static_cast<std::size_t>(i)] = baseline - v / p;
    }
    int seg = 0;
    for (int c = 0; c < width; ++c) {
      while (seg + 1 < n - 1 && sample_col[static_cast<std::size_t>(seg + 1)] <= c) ++seg;
      const int c0 = sample_col[static_cast<std::size_t>(seg)];
      const int c1 = sample_col[static_cast<std::size_t>(seg + 1)];
      const double t = c1 == c0 ? 0.0 : double(c - c0) / double(c1 - c0);
      path[static_cast<std::size_t>(c)] =
          sample_y[static_cast<std::size_t>(seg)] +
          t * (sample_y[static_cast<std::size_t>(seg + 1)] - sample_y[static_cast<std::size_t>(seg)]);
    }

    std::vector<int> rows(static_cast<std::size_t>(width));
    for (int c = 0; c < width; ++c) rows[static_cast<std::size_t>(c)] = static_cast<int>(std::lround(path[static_cast<std::size_t>(c)]));

    if (!cfg.allow_crossings)
      for (int c = 0; c < width; ++c)
        if (rows[static_cast<std::size_t>(c)] < band.row_top || rows[static_cast<std::size_t>(c)] > band.row_bottom)
          fail(Errc::BandOverflow, std::string("lead ") + lead_name(lead) +
                                       " leaves its band at column " + std::to_string(band.x_start + c));

    BinaryRaster mask(layout.page_width, layout.page_height);
    auto draw_run = [&](int x, int y_a, int y_b) {
      const int lo = std::min(y_a, y_b) - up;
      const int hi = std::max(y_a, y_b) + down;
      for (int y = lo; y <= hi; ++y) {
        if (y < 0 || y >= layout.page_height) continue;
        mask.set(x, y, true);
        out.image.set(x, y, kInk);
      }
      if (cfg.antialias) {
        if (lo - 1 >= 0 && !mask.get(x, lo - 1) && out.image.at(x, lo - 1) == Rgb{255, 255, 255})
          out.image.set(x, lo - 1, kHalo);
        if (hi + 1 < layout.page_height && !mask.get(x, hi + 1) && out.image.at(x, hi + 1) == Rgb{255, 255, 255})
          out.image.set(x, hi + 1, kHalo);
      }
    };

    for (int c = 0; c < width - 1; ++c)
      draw_run(band.x_start + c, rows[static_cast<std::size_t>(c)], rows[static_cast<std::size_t>(c + 1)]);
    // Hold the final row through band.x_end so the trace spans the whole band
    // and the end column is never empty.
    for (int x = last_col; x <= band.x_end; ++x)
      draw_run(x, rows[static_cast<std::size_t>(width - 1)], rows[static_cast<std::size_t>(width - 1)]);

    out.masks.emplace(lead, std::move(mask));
  }

  // Shared-ink report; bands can only touch vertical neighbours, but the scan
  // is global so any overlap is caught.
  const auto& leads = rec.leads();
  for (std::size_t a = 0; a < leads.size(); ++a)
    for (std::size_t b = a + 1; b < leads.size(); ++b) {
      const BinaryRaster& ma = out.masks.at(leads[a].first);
      const BinaryRaster& mb = out.masks.at(leads[b].first);
      const LeadBand& ba = layout.band_of(leads[a].first);
      const LeadBand& bb = layout.band_of(leads[b].first);
      if (ba.x_end < bb.x_start || bb.x_end < ba.x_start) continue;
      long shared = 0;
      for (int y = 0; y < layout.page_height; ++y)
        for (int x = std::max(ba.x_start, bb.x_start); x <= std::min(ba.x_end, bb.x_end); ++x)
          if (ma.get(x, y) && mb.get(x, y)) ++shared;
      if (shared > 0) out.crossings.emplace_back(leads[a].first, leads[b].first, shared);
    }

  return out;
}

void save_render(const RenderResult& result, const SignalRecord& rec, const RenderConfig& cfg,
                 const std::string& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base = fs::path(dir) / stem;

  save_png(result.image, base.string() + ".png");

  json truth;
  truth["seed"] = cfg.rng_seed;
  truth["sample_rate_hz"] = cfg.cal.sample_rate_hz;
  truth["gain_mv_per_pixel"] = cfg.cal.gain_mv_per_pixel;
  truth["pixels_per_sample"] = cfg.cal.pixels_per_sample;
  json baselines = json::object(), signals = json::object(), mask_files = json::object();
  for (const auto& [lead, row] : result.baselines) baselines[lead_name(lead)] = row;
  for (const auto& [lead, samples] : rec.leads()) signals[lead_name(lead)] = samples;
  for (const auto& [lead, mask] : result.masks) {
    const std::string mask_name = stem + ".mask." + lead_name(lead) + ".png";
    save_mask_png(mask, (fs::path(dir) / mask_name).string());
    mask_files[lead_name(lead)] = mask_name;
  }
  truth["baselines"] = std::move(baselines);
  truth["signals"] = std::move(signals);
  truth["mask_files"] = std::move(mask_files);
  json crossings = json::array();
  for (const auto& [a, b, n] : result.crossings)
    crossings.push_back(json::array({lead_name(a), lead_name(b), n}));
  truth["crossings"] = std::move(crossings);

  atomic_write_file(base.string() + ".truth.json", truth.dump(2) + "\n");
}

RenderTruth load_render_truth(const std::string& path) {
  RenderTruth t;
  json j;
  try {
    j = json::parse(read_file(path));
    t.seed = j.at("seed").get<std::uint64_t>();
    t.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    t.gain_mv_per_pixel = j.at("gain_mv_per_pixel").get<double>();
    t.pixels_per_sample = j.at("pixels_per_sample").get<double>();
    t.signals.sample_rate_hz = t.sample_rate_hz;
    for (const auto& [key, row] : j.at("baselines").items()) t.baselines[parse_lead(key)] = row.get<int>();
    // Leads ordered canonically so reloads are deterministic.
    const auto& sig = j.at("signals");
    for (Lead l : kAllLeads) {
      const char* name = lead_name(l);
      if (sig.contains(name)) t.signals.add(l, sig.at(name).get<std::vector<double>>());
    }
    for (const auto& [key, file] : j.at("mask_files").items())
      t.mask_files[parse_lead(key)] = file.get<std::string>();
    for (const auto& c : j.at("crossings"))
      t.crossings.emplace_back(parse_lead(c.at(0).get<std::string>()),
                               parse_lead(c.at(1).get<std::string>()), c.at(2).get<long>());
  } catch (const json::exception& e) {
    fail(Errc::DecodeError, std::string("bad render truth: ") + e.what());
  }
  return t;
}

} // namespace ecgraph
