#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ecgraph/image_io.hpp"
#include "ecgraph/log.hpp"
#include "ecgraph/render.hpp"
#include "ecgraph/signal_io.hpp"
#include "ecgraph/trace.hpp"

namespace fs = std::filesystem;

namespace ecgraph::cli {
namespace {

struct DigitizeOpts {
  std::vector<std::string> images;
  std::string layout;
  std::string out_dir = ".";
  double gain = CalibrationConfig{}.gain_mv_per_pixel;
  double rate = CalibrationConfig{}.sample_rate_hz;
  double pps = CalibrationConfig{}.pixels_per_sample;
  std::string method = "bidirectional";
  std::string polarity = "signed";
  bool overlay = false;
  std::string verify_dir;
  double tolerance = 2.0; // gain units
  int jobs = 1;
};

struct Outcome {
  bool ok = true;
  std::string log;
};

void draw_overlay(RasterImage img, const LayoutConfig& layout, const CalibrationConfig& cal,
                  const PageResult& page, const std::string& path) {
  const Rgb mark{220, 30, 30};
  for (const auto& d : page.leads) {
    if (!d.ok || !page.record.has(d.lead)) continue;
    const LeadBand& band = layout.band_of(d.lead);
    const auto& v = page.record.samples(d.lead);
    for (std::size_t k = 0; k < v.size(); ++k) {
      int x = band.x_start + static_cast<int>(std::lround(double(k) * cal.pixels_per_sample));
      // Absolute polarity folds the sign, so the mark sits on the upward arm.
      int y = d.baseline_row - static_cast<int>(std::lround(v[k] / cal.gain_mv_per_pixel));
      if (img.in_bounds(x, y)) img.set(x, y, mark);
    }
  }
  save_png(img, path);
}

// Compares one digitized page against its renderer ground truth. Every lead
// must be present, lengths must match, and every sample must land within
// tol_gain gain units of the reference.
bool verify_page(const SignalRecord& got, const std::string& truth_path,
                 const CalibrationConfig& cal, double tol_gain, std::ostringstream& log) {
  RenderTruth truth = load_render_truth(truth_path);
  const double tol_mv = tol_gain * cal.gain_mv_per_pixel;
  bool ok = true;
  double worst_err = 0.0;
  for (const auto& [lead, ref] : truth.signals.leads()) {
    if (!got.has(lead)) {
      log << "  verify: missing lead " << lead_name(lead) << "\n";
      ok = false;
      continue;
    }
    const auto& out = got.samples(lead);
    if (out.size() != ref.size()) {
      log << "  verify: lead " << lead_name(lead) << " length " << out.size() << " != "
          << ref.size() << "\n";
      ok = false;
      continue;
    }
    long bad = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      double err = std::abs(out[i] - ref[i]);
      worst_err = std::max(worst_err, err);
      if (err > tol_mv) ++bad;
    }
    if (bad > 0) {
      log << "  verify: lead " << lead_name(lead) << ": " << bad << "/" << ref.size()
          << " samples beyond " << tol_gain << " gain units\n";
      ok = false;
    }
  }
  log << "  verify: worst error " << worst_err / cal.gain_mv_per_pixel << " gain units, "
      << (ok ? "within" : "beyond") << " tolerance\n";
  return ok;
}

Outcome digitize_one(const DigitizeOpts& o, const LayoutConfig& layout,
                     const CalibrationConfig& cal, const std::string& image_path) {
  Outcome res;
  std::ostringstream log;
  const std::string stem = fs::path(image_path).stem().string();
  try {
    RasterImage img = load_image(image_path);
    TraceMethod method =
        o.method == "independent" ? TraceMethod::Independent : TraceMethod::Bidirectional;
    Polarity pol = o.polarity == "absolute" ? Polarity::Absolute : Polarity::SignedUp;
    PageResult page = digitize_page(img, layout, cal, method, pol);

    for (const auto& d : page.leads)
      if (!d.ok) {
        log << "  lead " << lead_name(d.lead) << ": " << d.error << "\n";
        res.ok = false;
      }

    if (!page.record.empty()) {
      const std::string csv = (fs::path(o.out_dir) / (stem + ".csv")).string();
      save_signal_csv(page.record, csv);
      SignalSidecar sc;
      sc.sample_rate_hz = cal.sample_rate_hz;
      sc.gain_mv_per_pixel = cal.gain_mv_per_pixel;
      sc.source_image = image_path;
      for (const auto& d : page.leads)
        if (d.ok && !d.gaps.empty()) sc.gaps[d.lead] = d.gaps;
      save_signal_sidecar(sc, (fs::path(o.out_dir) / (stem + ".json")).string());
      log << "  wrote " << csv << " (" << page.record.leads().size() << " leads, "
          << page.record.length() << " samples)\n";
    } else {
      log << "  no leads digitized\n";
      res.ok = false;
    }

    if (o.overlay)
      draw_overlay(img, layout, cal, page,
                   (fs::path(o.out_dir) / (stem + ".overlay.png")).string());

    if (!o.verify_dir.empty()) {
      const std::string truth = (fs::path(o.verify_dir) / (stem + ".truth.json")).string();
      if (!verify_page(page.record, truth, cal, o.tolerance, log)) res.ok = false;
    }
  } catch (const std::exception& e) {
    log << "  error: " << e.what() << "\n";
    res.ok = false;
  }
  res.log = (res.ok ? "ok   " : "FAIL ") + image_path + "\n" + log.str();
  return res;
}

int run_digitize(const DigitizeOpts& o) {
  try {
    LayoutConfig layout = load_layout(o.layout);
    CalibrationConfig cal{o.gain, o.rate, o.pps};
    cal.validate();
    fs::create_directories(o.out_dir);

    std::vector<Outcome> outcomes(o.images.size());
    const int jobs = std::max(1, std::min<int>(o.jobs, int(o.images.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= o.images.size()) break;
        outcomes[i] = digitize_one(o, layout, cal, o.images[i]);
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    int failed = 0;
    for (const auto& r : outcomes) {
      std::fputs(r.log.c_str(), stdout);
      if (!r.ok) ++failed;
    }
    if (failed > 0) {
      std::fprintf(stderr, "%d of %zu pages failed\n", failed, o.images.size());
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "digitize: %s\n", e.what());
    return 1;
  }
}

} // namespace

void add_digitize_command(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<DigitizeOpts>();
  CLI::App* cmd = app.add_subcommand("digitize", "Extract calibrated signals from chart images");
  cmd->add_option("images", o->images, "chart pages (PNG or BMP)")->required()->expected(-1);
  cmd->add_option("-l,--layout", o->layout, "chart layout file")->required();
  cmd->add_option("-o,--out", o->out_dir, "output directory")->capture_default_str();
  cmd->add_option("--gain", o->gain, "mV per pixel of deflection")->capture_default_str();
  cmd->add_option("--rate", o->rate, "sample rate in Hz")->capture_default_str();
  cmd->add_option("--pps", o->pps, "pixels per sample along x")->capture_default_str();
  cmd->add_option("--method", o->method, "trace separation method")
      ->check(CLI::IsMember({"bidirectional", "independent"}))
      ->capture_default_str();
  cmd->add_option("--polarity", o->polarity, "vertical voltage mapping")
      ->check(CLI::IsMember({"signed", "absolute"}))
      ->capture_default_str();
  cmd->add_flag("--overlay", o->overlay, "write <stem>.overlay.png with extracted samples marked");
  cmd->add_option("--verify-against", o->verify_dir,
                  "directory holding <stem>.truth.json files to compare against");
  cmd->add_option("--tolerance", o->tolerance, "verification tolerance in gain units")
      ->capture_default_str();
  cmd->add_option("-j,--jobs", o->jobs, "pages digitized in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->callback([o, &exit_code] { exit_code = run_digitize(*o); });
}

} // namespace ecgraph::cli
