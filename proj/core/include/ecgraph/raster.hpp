#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ecgraph/errors.hpp"

namespace ecgraph {

// Coordinates are 0-based, x to the right, y downward.

struct Rgb {
  std::uint8_t r = 255, g = 255, b = 255;
  bool operator==(const Rgb&) const = default;
};

// Integer average; the convention every luminance comparison in the library uses.
inline int luminance(Rgb c) { return (static_cast<int>(c.r) + c.g + c.b) / 3; }

class RasterImage {
public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = Rgb{});

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

  Rgb at(int x, int y) const { return px_[idx(x, y)]; }
  void set(int x, int y, Rgb c) { px_[idx(x, y)] = c; }

  const std::vector<Rgb>& pixels() const { return px_; }

private:
  std::size_t idx(int x, int y) const {
    if (!in_bounds(x, y)) fail(Errc::RegionOutOfBounds, "pixel out of bounds");
    return static_cast<std::size_t>(y) * width_ + x;
  }
  int width_ = 0, height_ = 0;
  std::vector<Rgb> px_;
};

// Inclusive rectangle.
struct Region {
  int x1 = 0, y1 = 0, x2 = -1, y2 = -1;

  int width() const { return x2 - x1 + 1; }
  int height() const { return y2 - y1 + 1; }
  bool contains(int x, int y) const { return x >= x1 && x <= x2 && y >= y1 && y <= y2; }
  bool valid() const { return x1 <= x2 && y1 <= y2; }
};

void check_region(const Region& r, int img_w, int img_h);

// One bit per pixel of the source image; true = ink.
class BinaryRaster {
public:
  BinaryRaster() = default;
  BinaryRaster(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

  bool get(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  std::size_t count() const;

private:
  int width_ = 0, height_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class Lead : int { I = 0, II, III, aVR, aVL, aVF, V1, V2, V3, V4, V5, V6 };
inline constexpr int kLeadCount = 12;
inline constexpr std::array<Lead, 12> kAllLeads = {
    Lead::I,  Lead::II, Lead::III, Lead::aVR, Lead::aVL, Lead::aVF,
    Lead::V1, Lead::V2, Lead::V3,  Lead::V4,  Lead::V5,  Lead::V6};

const char* lead_name(Lead l);
Lead parse_lead(const std::string& name); // throws UnknownLead

struct LeadBand {
  Lead lead = Lead::I;
  int x_start = 0;
  int x_end = -1;
  int row_top = 0;
  int row_bottom = -1;

  int width() const { return x_end - x_start + 1; }
  double row_center() const { return (row_top + row_bottom) / 2.0; }
};

// Chart geometry plus binarization constants. Serialized as a line-oriented
// text file: `key = value` pairs and one `band <lead> <x_start> <x_end>
// <row_top> <row_bottom>` line per lead.
struct LayoutConfig {
  int page_width = 0;
  int page_height = 0;
  Region roi;
  int ink_luminance_threshold = 128;
  Rgb grid_color{240, 128, 128};
  int grid_color_tolerance = 60;
  std::vector<LeadBand> bands;

  const LeadBand& band_of(Lead lead) const; // throws UnknownLead
  void validate() const;                    // bounds, band sanity, duplicate leads
};

LayoutConfig parse_layout(const std::string& text);
LayoutConfig load_layout(const std::string& path);
std::string format_layout(const LayoutConfig& cfg);
void save_layout(const LayoutConfig& cfg, const std::string& path);

// Regular n_cols x n_rows chart in reading order I,II,III,aVR,aVL,aVF,V1..V6
// down the first column, then the second.
LayoutConfig make_standard_layout(int band_width, int band_height, int margin = 40,
                                  int col_gap = 60, int n_cols = 2);

// True where the pixel is dark enough to be ink, is not grid-colored, and lies
// inside roi. Grid-colored = every channel within grid_color_tolerance of
// grid_color. Pixels outside roi are always false.
BinaryRaster binarize(const RasterImage& img, const LayoutConfig& cfg);
BinaryRaster binarize(const RasterImage& img, const LayoutConfig& cfg, const Region& roi);

bool is_grid_colored(Rgb c, Rgb grid, int tolerance);

} // namespace ecgraph
