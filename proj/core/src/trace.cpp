#include "ecgraph/trace.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "ecgraph/log.hpp"

namespace ecgraph {

PixelSet::PixelSet(Rect window) : win_(window) {
  if (window.width <= 0 || window.height <= 0)
    fail(Errc::RegionOutOfBounds, "pixel set window must be non-empty");
  bits_.assign(static_cast<std::size_t>(window.width) * window.height, 0);
  min_y_ = window.y0 + window.height; // empty sentinel
  max_y_ = window.y0 - 1;
}

void PixelSet::insert(int x, int y) {
  if (!win_.contains(x, y)) fail(Errc::RegionOutOfBounds, "pixel outside set window");
  auto& b = bits_[idx(x, y)];
  if (b) return;
  b = 1;
  ++count_;
  min_y_ = std::min(min_y_, y);
  max_y_ = std::max(max_y_, y);
}

std::vector<int> PixelSet::column_rows(int x) const {
  std::vector<int> ys;
  if (x < win_.x0 || x >= win_.x0 + win_.width || empty()) return ys;
  for (int y = min_y_; y <= max_y_; ++y)
    if (bits_[idx(x, y)]) ys.push_back(y);
  return ys;
}

std::vector<int> PixelSet::row_columns(int y) const {
  std::vector<int> xs;
  if (y < win_.y0 || y >= win_.y0 + win_.height) return xs;
  for (int x = win_.x0; x < win_.x0 + win_.width; ++x)
    if (bits_[idx(x, y)]) xs.push_back(x);
  return xs;
}

void PixelSet::intersect(const PixelSet& other) {
  if (!(win_ == other.win_)) fail(Errc::RegionOutOfBounds, "pixel set windows differ");
  count_ = 0;
  int new_min = win_.y0 + win_.height, new_max = win_.y0 - 1;
  for (int y = win_.y0; y < win_.y0 + win_.height; ++y)
    for (int x = win_.x0; x < win_.x0 + win_.width; ++x) {
      auto& b = bits_[idx(x, y)];
      b = static_cast<std::uint8_t>(b & other.bits_[idx(x, y)]);
      if (b) {
        ++count_;
        new_min = std::min(new_min, y);
        new_max = std::max(new_max, y);
      }
    }
  min_y_ = new_min;
  max_y_ = new_max;
}

void PixelSet::unite(const PixelSet& other) {
  if (!(win_ == other.win_)) fail(Errc::RegionOutOfBounds, "pixel set windows differ");
  count_ = 0;
  int new_min = win_.y0 + win_.height, new_max = win_.y0 - 1;
  for (int y = win_.y0; y < win_.y0 + win_.height; ++y)
    for (int x = win_.x0; x < win_.x0 + win_.width; ++x) {
      auto& b = bits_[idx(x, y)];
      b = static_cast<std::uint8_t>(b | other.bits_[idx(x, y)]);
      if (b) {
        ++count_;
        new_min = std::min(new_min, y);
        new_max = std::max(new_max, y);
      }
    }
  min_y_ = new_min;
  max_y_ = new_max;
}

bool PixelSet::operator==(const PixelSet& other) const {
  return win_ == other.win_ && bits_ == other.bits_;
}

namespace {

struct Delta {
  int dx, dy;
};

// Five moves per direction; the vertical pair is shared.
constexpr Delta kForward[5] = {{1, -1}, {1, 0}, {1, 1}, {0, -1}, {0, 1}};
constexpr Delta kBackward[5] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}};

} // namespace

PixelSet connected_domain(const BinaryRaster& bin, Point seed, Direction dir,
                          const PixelSet* mask, std::optional<Rect> window) {
  Rect win = window.value_or(Rect{0, 0, bin.width(), bin.height()});
  PixelSet out(win);
  if (!win.contains(seed.x, seed.y) || !bin.in_bounds(seed.x, seed.y) || !bin.get(seed.x, seed.y) ||
      (mask && !mask->contains(seed.x, seed.y)))
    fail(Errc::SeedNotInk, "closure seed (" + std::to_string(seed.x) + "," + std::to_string(seed.y) +
                               ") is not an admissible ink pixel");

  const Delta* deltas = dir == Direction::Forward ? kForward : kBackward;
  std::vector<Point> stack;
  stack.push_back(seed);
  out.insert(seed.x, seed.y);
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    for (int i = 0; i < 5; ++i) {
      const int nx = p.x + deltas[i].dx;
      const int ny = p.y + deltas[i].dy;
      if (!win.contains(nx, ny) || !bin.in_bounds(nx, ny)) continue;
      if (!bin.get(nx, ny)) continue;
      if (mask && !mask->contains(nx, ny)) continue;
      if (out.contains(nx, ny)) continue;
      out.insert(nx, ny);
      stack.push_back(Point{nx, ny});
    }
  }
  return out;
}

namespace {

Point top_ink_in_column(const BinaryRaster& bin, const LeadBand& band, int column,
                        const char* what) {
  for (int y = band.row_top; y <= band.row_bottom; ++y)
    if (bin.in_bounds(column, y) && bin.get(column, y)) return Point{column, y};
  fail(Errc::EmptyStartColumn, std::string("no ink in ") + what + " column " +
                                   std::to_string(column) + " of lead " + lead_name(band.lead));
}

} // namespace

Point find_start_point(const BinaryRaster& bin, const LeadBand& band) {
  return top_ink_in_column(bin, band, band.x_start, "start");
}

Point find_end_point(const BinaryRaster& bin, const LeadBand& band) {
  return top_ink_in_column(bin, band, band.x_end, "end");
}

int detect_baseline(const BinaryRaster& bin, const LeadBand& band) {
  int best_row = -1;
  long best_count = 0;
  const double center = band.row_center();
  for (int y = band.row_top; y <= band.row_bottom; ++y) {
    long c = 0;
    for (int x = band.x_start; x <= band.x_end; ++x)
      if (bin.in_bounds(x, y) && bin.get(x, y)) ++c;
    if (c == 0) continue;
    if (best_row < 0 || c > best_count) {
      best_row = y;
      best_count = c;
    } else if (c == best_count) {
      const double d_new = std::abs(y - center), d_best = std::abs(best_row - center);
      if (d_new < d_best) best_row = y; // equal distance keeps the smaller (earlier) row
    }
  }
  if (best_row < 0)
    fail(Errc::EmptyBand, std::string("band for lead ") + lead_name(band.lead) + " holds no ink");
  return best_row;
}

std::vector<std::pair<int, int>> compute_gaps(const PixelSet& px, int x_start, int x_end) {
  std::vector<std::pair<int, int>> gaps;
  int run_start = -1;
  for (int x = x_start; x <= x_end; ++x) {
    const bool empty_col = px.column_rows(x).empty();
    if (empty_col && run_start < 0) run_start = x;
    if (!empty_col && run_start >= 0) {
      gaps.emplace_back(run_start, x - 1);
      run_start = -1;
    }
  }
  if (run_start >= 0) gaps.emplace_back(run_start, x_end);
  return gaps;
}

namespace {

Rect band_window(const BinaryRaster& bin, const LeadBand& band) {
  // Full vertical freedom: a drifting trace may leave its nominal rows, so
  // only the columns are clamped to the band.
  return Rect{band.x_start, 0, band.width(), bin.height()};
}

LeadTrace make_trace(Lead lead, PixelSet px, const LeadBand& band, int baseline_row) {
  LeadTrace t;
  t.lead = lead;
  t.x_start = band.x_start;
  t.x_end = band.x_end;
  t.baseline_row = baseline_row;

  auto start_rows = px.column_rows(band.x_start);
  auto end_rows = px.column_rows(band.x_end);
  if (end_rows.empty())
    fail(Errc::EndUnreachable, std::string("lead ") + lead_name(lead) +
                                   ": no trace pixel reaches column " + std::to_string(band.x_end));
  if (start_rows.empty())
    fail(Errc::EmptyTrace, std::string("lead ") + lead_name(lead) + ": trace misses its start column");
  t.start = Point{band.x_start, start_rows.front()};
  t.end = Point{band.x_end, end_rows.front()};
  t.gaps = compute_gaps(px, band.x_start, band.x_end);
  t.pixels = std::move(px);
  return t;
}

} // namespace

LeadTrace extract_independent_lead(const BinaryRaster& bin, const LeadBand& band) {
  const Point start = find_start_point(bin, band);
  PixelSet closure = connected_domain(bin, start, Direction::Forward, nullptr, band_window(bin, band));
  const int baseline = detect_baseline(bin, band);
  return make_trace(band.lead, std::move(closure), band, baseline);
}

LeadTrace extract_crossed_lead(const BinaryRaster& bin, const LeadBand& band,
                               std::optional<int> baseline_row) {
  const Rect win = band_window(bin, band);
  const Point start = find_start_point(bin, band);
  const Point end_seed = find_end_point(bin, band);

  const PixelSet i1 = connected_domain(bin, start, Direction::Forward, nullptr, win);
  const PixelSet i2 = connected_domain(bin, end_seed, Direction::Backward, nullptr, win);

  PixelSet both = i1;
  both.intersect(i2);
  // The intersection can only shrink either closure.
  assert(both.size() <= i1.size() && both.size() <= i2.size());
  if (both.empty())
    fail(Errc::EmptyIntersection, std::string("lead ") + lead_name(band.lead) +
                                      ": forward and backward closures do not meet");

  const int baseline = baseline_row ? *baseline_row : detect_baseline(bin, band);
  const std::vector<int> seeds_x = both.row_columns(baseline);
  if (seeds_x.empty())
    fail(Errc::NoSearchingPoints, std::string("lead ") + lead_name(band.lead) +
                                      ": trace never touches baseline row " + std::to_string(baseline));

  // Union of per-seed closures, each restricted to the intersection. A seed
  // already absorbed by an earlier closure adds nothing (reachability is
  // transitive), so skipping covered seeds leaves the union unchanged.
  // Walking seeds left-to-right for the forward pass and right-to-left for
  // the backward pass makes the first closure of each pass absorb almost
  // every later seed; hundreds of baseline seeds then cost two closures.
  PixelSet fwd_acc(win), bwd_acc(win);
  for (int sx : seeds_x) {
    if (fwd_acc.contains(sx, baseline)) continue;
    PixelSet i3 = connected_domain(bin, Point{sx, baseline}, Direction::Forward, &both, win);
    fwd_acc.unite(i3);
  }
  for (auto it = seeds_x.rbegin(); it != seeds_x.rend(); ++it) {
    if (bwd_acc.contains(*it, baseline)) continue;
    PixelSet i4 = connected_domain(bin, Point{*it, baseline}, Direction::Backward, &both, win);
    bwd_acc.unite(i4);
  }

  PixelSet regrown = std::move(fwd_acc);
  regrown.unite(bwd_acc);
  return make_trace(band.lead, std::move(regrown), band, baseline);
}

void CalibrationConfig::validate() const {
  if (!(gain_mv_per_pixel > 0)) fail(Errc::ConfigShapeMismatch, "gain_mv_per_pixel must be positive");
  if (!(sample_rate_hz > 0)) fail(Errc::ConfigShapeMismatch, "sample_rate_hz must be positive");
  if (!(pixels_per_sample > 0)) fail(Errc::ConfigShapeMismatch, "pixels_per_sample must be positive");
}

void SignalRecord::add(Lead lead, std::vector<double> samples) {
  if (has(lead)) fail(Errc::UnknownLead, std::string("duplicate lead ") + lead_name(lead));
  if (!leads_.empty() && samples.size() != length())
    fail(Errc::LengthMismatch, "lead lengths differ within one record");
  for (double v : samples)
    if (!std::isfinite(v)) fail(Errc::LengthMismatch, "non-finite sample value");
  leads_.emplace_back(lead, std::move(samples));
}

bool SignalRecord::has(Lead lead) const {
  for (const auto& [l, s] : leads_)
    if (l == lead) return true;
  return false;
}

const std::vector<double>& SignalRecord::samples(Lead lead) const {
  for (const auto& [l, s] : leads_)
    if (l == lead) return s;
  fail(Errc::UnknownLead, std::string("record has no lead ") + lead_name(lead));
}

std::vector<std::optional<Point>> trace_representatives(const LeadTrace& trace) {
  const int w = trace.x_end - trace.x_start + 1;
  std::vector<std::optional<Point>> reps(static_cast<std::size_t>(w));
  int prev_y = trace.start.y;
  bool have_prev = false;
  for (int x = trace.x_start; x <= trace.x_end; ++x) {
    const auto ys = trace.pixels.column_rows(x);
    if (ys.empty()) continue; // gap, interpolated later
    int best = ys.front();
    if (x == trace.x_start) {
      best = trace.start.y;
    } else {
      const int target = have_prev ? prev_y : trace.start.y;
      int best_d = std::numeric_limits<int>::max();
      for (int y : ys) {
        const int d = std::abs(y - target);
        if (d < best_d) { // ties keep the first (smaller) y
          best_d = d;
          best = y;
        }
      }
    }
    reps[static_cast<std::size_t>(x - trace.x_start)] = Point{x, best};
    prev_y = best;
    have_prev = true;
  }
  return reps;
}

std::vector<double> trace_to_signal(const LeadTrace& trace, const CalibrationConfig& cal,
                                    Polarity polarity) {
  cal.validate();
  const int w = trace.x_end - trace.x_start + 1;
  if (w <= 0) fail(Errc::EmptyTrace, "trace spans no columns");

  const auto reps = trace_representatives(trace);

  // Per-column y as a real number; gap columns interpolate linearly between
  // the nearest chosen neighbours, clamping at the edges.
  std::vector<double> ys(static_cast<std::size_t>(w), 0.0);
  std::vector<bool> known(static_cast<std::size_t>(w), false);
  for (int i = 0; i < w; ++i)
    if (reps[static_cast<std::size_t>(i)]) {
      ys[static_cast<std::size_t>(i)] = reps[static_cast<std::size_t>(i)]->y;
      known[static_cast<std::size_t>(i)] = true;
    }
  int first_known = -1, last_known = -1;
  for (int i = 0; i < w; ++i)
    if (known[static_cast<std::size_t>(i)]) {
      if (first_known < 0) first_known = i;
      last_known = i;
    }
  if (first_known < 0) fail(Errc::EmptyTrace, "trace has no representative in any column");
  for (int i = 0; i < first_known; ++i) ys[static_cast<std::size_t>(i)] = ys[static_cast<std::size_t>(first_known)];
  for (int i = last_known + 1; i < w; ++i) ys[static_cast<std::size_t>(i)] = ys[static_cast<std::size_t>(last_known)];
  int i = first_known;
  while (i < last_known) {
    int j = i + 1;
    while (!known[static_cast<std::size_t>(j)]) ++j;
    for (int k = i + 1; k < j; ++k)
      ys[static_cast<std::size_t>(k)] =
          ys[static_cast<std::size_t>(i)] +
          (ys[static_cast<std::size_t>(j)] - ys[static_cast<std::size_t>(i)]) * double(k - i) / double(j - i);
    i = j;
  }

  const double p = cal.gain_mv_per_pixel;
  const double b = trace.baseline_row;
  std::vector<double> per_column(static_cast<std::size_t>(w));
  for (int c = 0; c < w; ++c) {
    const double y = ys[static_cast<std::size_t>(c)];
    per_column[static_cast<std::size_t>(c)] =
        polarity == Polarity::SignedUp ? (b - y) * p : std::abs(y - b) * p;
  }

  // Nearest-column downsampling: sample k sits at column k * pixels_per_sample.
  const double pps = cal.pixels_per_sample;
  const int n_samples = static_cast<int>(std::floor((w - 1) / pps)) + 1;
  std::vector<double> out(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    int col = static_cast<int>(std::llround(k * pps));
    col = std::clamp(col, 0, w - 1);
    out[static_cast<std::size_t>(k)] = per_column[static_cast<std::size_t>(col)];
  }
  return out;
}

PageResult digitize_page(const RasterImage& img, const LayoutConfig& layout,
                         const CalibrationConfig& cal, TraceMethod method, Polarity polarity) {
  layout.validate();
  cal.validate();
  const BinaryRaster bin = binarize(img, layout);

  PageResult result;
  result.record.sample_rate_hz = cal.sample_rate_hz;
  for (const auto& band : layout.bands) {
    LeadDiagnostics diag;
    diag.lead = band.lead;
    try {
      LeadTrace trace = method == TraceMethod::Bidirectional
                            ? extract_crossed_lead(bin, band)
                            : extract_independent_lead(bin, band);
      std::vector<double> signal = trace_to_signal(trace, cal, polarity);
      diag.baseline_row = trace.baseline_row;
      diag.gaps = trace.gaps;
      int end_candidates = 0;
      for (int y = band.row_top; y <= band.row_bottom; ++y)
        if (bin.in_bounds(band.x_end, y) && bin.get(band.x_end, y)) ++end_candidates;
      diag.multi_candidate_end = end_candidates > 1;
      diag.ok = true;
      result.record.add(band.lead, std::move(signal));
    } catch (const Error& e) {
      diag.ok = false;
      diag.error = e.what();
      log::warn("digitize: lead ", lead_name(band.lead), " failed: ", e.what());
    }
    result.leads.push_back(std::move(diag));
  }
  return result;
}

} // namespace ecgraph
