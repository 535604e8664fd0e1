// Microbenchmarks for the hot paths: the connectivity closure, single-band
// extraction, whole-page digitization, page rendering, and network
// forward/backward at the published problem sizes.

#include <benchmark/benchmark.h>

#include "ecgraph/chartgen.hpp"
#include "ecgraph/crtnet.hpp"
#include "ecgraph/gradcheck.hpp"
#include "ecgraph/raster.hpp"
#include "ecgraph/render.hpp"
#include "ecgraph/trace.hpp"

namespace {

using namespace ecgraph;

struct PageFixture {
  RenderConfig cfg;
  CalibrationConfig cal;
  RenderResult page;
  BinaryRaster bin;

  explicit PageFixture(bool crossings) {
    cfg.layout = make_standard_layout(360, 100);
    cfg.cal = cal;
    cfg.antialias = false;
    cfg.allow_crossings = crossings;
    if (crossings) {
      CrossingChart chart = make_crossing_record(cfg.layout, cal, 42);
      page = render_record(chart.record, cfg);
    } else {
      SignalRecord rec = make_waveform_record(cfg.layout, cal, WaveKind::Mix, 42);
      page = render_record(rec, cfg);
    }
    bin = binarize(page.image, cfg.layout);
  }
};

const PageFixture& plain_page() {
  static PageFixture f(false);
  return f;
}

const PageFixture& crossing_page() {
  static PageFixture f(true);
  return f;
}

void BM_ConnectedDomain(benchmark::State& state) {
  const PageFixture& f = plain_page();
  const LeadBand& band = f.cfg.layout.bands.front();
  const Point start = find_start_point(f.bin, band);
  for (auto _ : state) {
    auto px = connected_domain(f.bin, start, Direction::Forward, nullptr,
                               Rect{band.x_start, 0, band.x_end - band.x_start + 1,
                                    f.bin.height()});
    benchmark::DoNotOptimize(px.size());
  }
}
BENCHMARK(BM_ConnectedDomain);

void BM_ExtractCrossedLead(benchmark::State& state) {
  const PageFixture& f = crossing_page();
  const LeadBand& band = f.cfg.layout.bands[1]; // a dipping lead
  for (auto _ : state) {
    LeadTrace t = extract_crossed_lead(f.bin, band);
    benchmark::DoNotOptimize(t.pixels.size());
  }
}
BENCHMARK(BM_ExtractCrossedLead);

void BM_DigitizePage(benchmark::State& state) {
  const PageFixture& f = crossing_page();
  for (auto _ : state) {
    PageResult out = digitize_page(f.page.image, f.cfg.layout, f.cal);
    benchmark::DoNotOptimize(out.record.length());
  }
}
BENCHMARK(BM_DigitizePage)->Unit(benchmark::kMillisecond);

void BM_RenderPage(benchmark::State& state) {
  RenderConfig cfg;
  CalibrationConfig cal;
  cfg.layout = make_standard_layout(360, 100);
  cfg.cal = cal;
  SignalRecord rec = make_waveform_record(cfg.layout, cal, WaveKind::Mix, 7);
  for (auto _ : state) {
    RenderResult page = render_record(rec, cfg);
    benchmark::DoNotOptimize(page.image.width());
  }
}
BENCHMARK(BM_RenderPage)->Unit(benchmark::kMillisecond);

ModelConfig beat_model() {
  ModelConfig cfg;
  cfg.input_length = 200;
  cfg.input_leads = 1;
  cfg.n_classes = 5;
  cfg.n_cnn_blocks = 1;
  return cfg;
}

void BM_CrtNetForwardBeat(benchmark::State& state) {
  ModelConfig cfg = beat_model();
  Rng rng = Rng::seeded(1);
  CrtNetParams params = init_params(cfg, rng);
  Tensor x({200, 1});
  for (auto& v : x.data()) v = rng.normal();
  for (auto _ : state) {
    Tensor probs = predict_probs(cfg, params, x);
    benchmark::DoNotOptimize(probs[0]);
  }
}
BENCHMARK(BM_CrtNetForwardBeat)->Unit(benchmark::kMillisecond);

void BM_CrtNetBackwardBeat(benchmark::State& state) {
  ModelConfig cfg = beat_model();
  Rng rng = Rng::seeded(1);
  CrtNetParams params = init_params(cfg, rng);
  Tensor x({200, 1});
  for (auto& v : x.data()) v = rng.normal();
  for (auto _ : state) {
    auto bound = nn::bind_params(params.tensors, true);
    ForwardResult fwd = crtnet_forward(cfg, bound, x);
    ad::Var loss = ad::cross_entropy_logits(fwd.logits, 0);
    ad::backward(loss);
    benchmark::DoNotOptimize(loss.value()[0]);
  }
}
BENCHMARK(BM_CrtNetBackwardBeat)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
