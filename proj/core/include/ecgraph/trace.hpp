#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecgraph/raster.hpp"

namespace ecgraph {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct Rect {
  int x0 = 0, y0 = 0, width = 0, height = 0;
  bool contains(int x, int y) const {
    return x >= x0 && x < x0 + width && y >= y0 && y < y0 + height;
  }
  bool operator==(const Rect&) const = default;
};

// Pixel membership bitmap over a rectangular window. The tracked count always
// equals the number of set bits; min_y/max_y bound the members when non-empty.
class PixelSet {
public:
  PixelSet() = default;
  explicit PixelSet(Rect window);

  const Rect& window() const { return win_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }

  bool contains(int x, int y) const { return win_.contains(x, y) && bits_[idx(x, y)] != 0; }
  void insert(int x, int y);

  int min_y() const { return min_y_; }
  int max_y() const { return max_y_; }

  std::vector<int> column_rows(int x) const; // ascending y of members in column x
  std::vector<int> row_columns(int y) const; // ascending x of members in row y

  void intersect(const PixelSet& other); // windows must match
  void unite(const PixelSet& other);     // windows must match

  bool operator==(const PixelSet& other) const;

  template <typename Fn> void for_each(Fn fn) const { // row-major, y then x
    for (int y = win_.y0; y < win_.y0 + win_.height; ++y)
      for (int x = win_.x0; x < win_.x0 + win_.width; ++x)
        if (bits_[idx(x, y)]) fn(x, y);
  }

private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y - win_.y0) * win_.width + (x - win_.x0);
  }
  Rect win_{};
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
  int min_y_ = 0, max_y_ = -1;
};

// Forward moves never decrease x, backward moves never increase it; both may
// move vertically in place.
enum class Direction { Forward, Backward };

// Reachability closure of seed over true bits, stepping only in the five
// moves of the chosen direction. An optional mask restricts membership (seed
// included); an optional window clamps the explored rectangle.
PixelSet connected_domain(const BinaryRaster& bin, Point seed, Direction dir,
                          const PixelSet* mask = nullptr,
                          std::optional<Rect> window = std::nullopt);

// Topmost true bit on column band.x_start within the band's rows.
Point find_start_point(const BinaryRaster& bin, const LeadBand& band); // EmptyStartColumn
// Same rule at band.x_end.
Point find_end_point(const BinaryRaster& bin, const LeadBand& band); // EmptyStartColumn

// Row within the band's rows with the most true bits across the band's
// columns; ties resolve to the row nearest the band's vertical center, then
// to the smaller row. EmptyBand when the band holds no ink.
int detect_baseline(const BinaryRaster& bin, const LeadBand& band);

struct LeadTrace {
  Lead lead = Lead::I;
  PixelSet pixels;
  Point start;
  Point end;
  int baseline_row = 0;
  int x_start = 0;
  int x_end = -1;
  std::vector<std::pair<int, int>> gaps; // inclusive column ranges with no member
};

std::vector<std::pair<int, int>> compute_gaps(const PixelSet& px, int x_start, int x_end);

// Single forward closure from the band's start point.
LeadTrace extract_independent_lead(const BinaryRaster& bin, const LeadBand& band);

// Two-stage separation for traces that may touch a neighbouring lead:
// intersect the forward closure from the start with the backward closure from
// the end, then regrow the trace from every intersection pixel on the
// baseline row, restricted to that intersection, and keep the union.
// baseline_row overrides detection when supplied.
LeadTrace extract_crossed_lead(const BinaryRaster& bin, const LeadBand& band,
                               std::optional<int> baseline_row = std::nullopt);

struct CalibrationConfig {
  double gain_mv_per_pixel = 0.01; // p: one pixel of deflection in millivolts
  double sample_rate_hz = 250.0;
  double pixels_per_sample = 2.0;

  void validate() const;
};

// Vertical polarity of the pixel-to-voltage map. SignedUp treats rows above
// the baseline as positive; Absolute folds both sides to |y - b| * p.
enum class Polarity { SignedUp, Absolute };

// One chart page's worth of calibrated signals, leads in insertion order.
class SignalRecord {
public:
  double sample_rate_hz = 250.0;

  void add(Lead lead, std::vector<double> samples); // equal lengths, finite
  bool has(Lead lead) const;
  const std::vector<double>& samples(Lead lead) const; // UnknownLead
  const std::vector<std::pair<Lead, std::vector<double>>>& leads() const { return leads_; }
  std::size_t length() const { return leads_.empty() ? 0 : leads_.front().second.size(); }
  bool empty() const { return leads_.empty(); }

private:
  std::vector<std::pair<Lead, std::vector<double>>> leads_;
};

// Column representatives -> gap interpolation -> voltage -> nearest-column
// downsampling. Representative = member closest in y to the previous column's
// choice (ties to the smaller y); the first column uses the start point.
std::vector<double> trace_to_signal(const LeadTrace& trace, const CalibrationConfig& cal,
                                    Polarity polarity = Polarity::SignedUp);

// Representative pixel per column before downsampling; gap columns carry no
// entry. Exposed for mask-level verification and overlays.
std::vector<std::optional<Point>> trace_representatives(const LeadTrace& trace);

enum class TraceMethod { Bidirectional, Independent };

struct LeadDiagnostics {
  Lead lead = Lead::I;
  bool ok = false;
  std::string error; // empty when ok
  int baseline_row = -1;
  std::vector<std::pair<int, int>> gaps;
  bool multi_candidate_end = false;
};

struct PageResult {
  SignalRecord record; // leads that digitized cleanly, in band order
  std::vector<LeadDiagnostics> leads;

  bool all_ok() const {
    for (const auto& d : leads)
      if (!d.ok) return false;
    return true;
  }
};

// Digitizes every band; a failing band is reported in its diagnostics entry
// and the remaining bands still digitize.
PageResult digitize_page(const RasterImage& img, const LayoutConfig& layout,
                         const CalibrationConfig& cal,
                         TraceMethod method = TraceMethod::Bidirectional,
                         Polarity polarity = Polarity::SignedUp);

} // namespace ecgraph
