#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ecgraph/trace.hpp"

namespace ecgraph {

// Additive low-frequency baseline wander, in signal units.
struct DriftSpec {
  double amplitude_mv = 0.0;
  double period_s = 0.0; // <= 0 disables
  double phase = 0.0;    // radians
};

struct RenderConfig {
  LayoutConfig layout;
  CalibrationConfig cal;
  std::map<Lead, DriftSpec> drift; // leads absent here render without wander
  int line_thickness = 1;
  bool antialias = false;      // adds a gray halo in the image, never in masks
  bool allow_crossings = true; // false: leaving the band rows is BandOverflow
  int grid_spacing_px = 20;    // <= 0 disables the grid
  std::uint64_t rng_seed = 0;  // recorded in the ground-truth sidecar

  void validate() const;
};

struct RenderResult {
  RasterImage image;
  std::map<Lead, BinaryRaster> masks; // exact ink pixels per lead
  std::map<Lead, int> baselines;      // row of 0 mV per lead
  // Lead pairs whose ink overlaps, with the shared pixel count.
  std::vector<std::tuple<Lead, Lead, long>> crossings;
};

// Draws every lead of the record into its band. Sample i sits at column
// x_start + round(i * pixels_per_sample); column x carries the full vertical
// run from path(x) to path(x+1), so consecutive columns always share a
// forward 5-neighbour and monotone segments digitize back exactly.
RenderResult render_record(const SignalRecord& rec, const RenderConfig& cfg);

// Ground truth bundle for a rendered page, as written to <stem>.truth.json.
struct RenderTruth {
  std::uint64_t seed = 0;
  double sample_rate_hz = 0.0;
  double gain_mv_per_pixel = 0.0;
  double pixels_per_sample = 0.0;
  std::map<Lead, int> baselines;
  SignalRecord signals;
  std::map<Lead, std::string> mask_files; // relative to the sidecar
  std::vector<std::tuple<Lead, Lead, long>> crossings;
};

// Writes <stem>.png, <stem>.mask.<lead>.png and <stem>.truth.json into dir.
void save_render(const RenderResult& result, const SignalRecord& rec, const RenderConfig& cfg,
                 const std::string& dir, const std::string& stem);

RenderTruth load_render_truth(const std::string& path);

} // namespace ecgraph
