#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ecgraph/chartgen.hpp"
#include "ecgraph/render.hpp"
#include "ecgraph/signal_io.hpp"

namespace fs = std::filesystem;

namespace ecgraph::cli {

std::string page_stem(long index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "page_%04ld", index);
  return buf;
}

namespace {

struct RenderOpts {
  std::string out_dir;
  long pages = 1;
  std::uint64_t seed = 0;
  std::string wave = "mix";
  bool crossings = false;
  std::string layout_file;
  std::string signal_csv; // render a caller-provided record instead
  int band_width = 360;
  int band_height = 100;
  int margin = 40;
  int col_gap = 60;
  int cols = 2;
  int thickness = 1;
  bool antialias = false;
  int grid = 20;
  double gain = CalibrationConfig{}.gain_mv_per_pixel;
  double rate = CalibrationConfig{}.sample_rate_hz;
  double pps = CalibrationConfig{}.pixels_per_sample;
};

int run_render(const RenderOpts& o) {
  try {
    LayoutConfig layout = o.layout_file.empty()
                              ? make_standard_layout(o.band_width, o.band_height, o.margin,
                                                     o.col_gap, o.cols)
                              : load_layout(o.layout_file);
    layout.validate();
    CalibrationConfig cal{o.gain, o.rate, o.pps};
    cal.validate();
    fs::create_directories(o.out_dir);
    save_layout(layout, (fs::path(o.out_dir) / "layout.txt").string());

    const WaveKind kind = parse_wave_kind(o.wave);
    for (long p = 0; p < o.pages; ++p) {
      const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(p);
      SignalRecord rec;
      if (!o.signal_csv.empty())
        rec = load_signal_csv(o.signal_csv, cal.sample_rate_hz);
      else if (o.crossings)
        rec = make_crossing_record(layout, cal, seed).record;
      else
        rec = make_waveform_record(layout, cal, kind, seed);

      RenderConfig cfg;
      cfg.layout = layout;
      cfg.cal = cal;
      cfg.line_thickness = o.thickness;
      cfg.antialias = o.antialias;
      cfg.allow_crossings = o.crossings;
      cfg.grid_spacing_px = o.grid;
      cfg.rng_seed = seed;
      cfg.validate();

      RenderResult out = render_record(rec, cfg);
      const std::string stem = page_stem(p);
      save_render(out, rec, cfg, o.out_dir, stem);
      std::printf("%s: %zu leads, %zu samples, %zu crossing pairs\n", stem.c_str(),
                  rec.leads().size(), rec.length(), out.crossings.size());
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "render: %s\n", e.what());
    return 1;
  }
}

} // namespace

void add_render_command(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<RenderOpts>();
  CLI::App* cmd = app.add_subcommand("render", "Generate chart pages with ground truth");
  cmd->add_option("-o,--out", o->out_dir, "output directory")->required();
  cmd->add_option("-n,--pages", o->pages, "pages to generate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o->seed, "base seed; page i uses seed+i")->capture_default_str();
  cmd->add_option("--waveform", o->wave, "waveform family per lead")
      ->check(CLI::IsMember({"sine", "square", "composite", "mix"}))
      ->capture_default_str();
  cmd->add_flag("--crossings", o->crossings, "make some leads dip into the band below");
  cmd->add_option("--layout", o->layout_file, "layout file (default: generated standard grid)");
  cmd->add_option("--signal-csv", o->signal_csv, "render this signal CSV instead of waveforms");
  cmd->add_option("--band-width", o->band_width)->capture_default_str();
  cmd->add_option("--band-height", o->band_height)->capture_default_str();
  cmd->add_option("--margin", o->margin)->capture_default_str();
  cmd->add_option("--col-gap", o->col_gap)->capture_default_str();
  cmd->add_option("--cols", o->cols)->capture_default_str();
  cmd->add_option("--thickness", o->thickness, "line thickness in pixels")->capture_default_str();
  cmd->add_flag("--antialias", o->antialias, "gray halo around the line (image only)");
  cmd->add_option("--grid", o->grid, "grid spacing in pixels, 0 disables")->capture_default_str();
  cmd->add_option("--gain", o->gain, "mV per pixel of deflection")->capture_default_str();
  cmd->add_option("--rate", o->rate, "sample rate in Hz")->capture_default_str();
  cmd->add_option("--pps", o->pps, "pixels per sample along x")->capture_default_str();
  cmd->callback([o, &exit_code] { exit_code = run_render(*o); });
}

} // namespace ecgraph::cli
