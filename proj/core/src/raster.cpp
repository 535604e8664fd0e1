#include "ecgraph/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ecgraph {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) fail(Errc::RegionOutOfBounds, "image dimensions must be positive");
  px_.assign(static_cast<std::size_t>(width) * height, fill);
}

void check_region(const Region& r, int img_w, int img_h) {
  if (!r.valid()) fail(Errc::RegionOutOfBounds, "region has x1>x2 or y1>y2");
  if (r.x1 < 0 || r.y1 < 0 || r.x2 >= img_w || r.y2 >= img_h)
    fail(Errc::RegionOutOfBounds, "region exceeds image bounds");
}

BinaryRaster::BinaryRaster(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) fail(Errc::RegionOutOfBounds, "raster dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t BinaryRaster::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

const char* lead_name(Lead l) {
  static const char* names[] = {"I",  "II", "III", "aVR", "aVL", "aVF",
                                "V1", "V2", "V3",  "V4",  "V5",  "V6"};
  return names[static_cast<int>(l)];
}

Lead parse_lead(const std::string& name) {
  for (Lead l : kAllLeads)
    if (name == lead_name(l)) return l;
  fail(Errc::UnknownLead, "no lead named '" + name + "'");
}

const LeadBand& LayoutConfig::band_of(Lead lead) const {
  for (const auto& b : bands)
    if (b.lead == lead) return b;
  fail(Errc::UnknownLead, std::string("layout has no band for lead ") + lead_name(lead));
}

void LayoutConfig::validate() const {
  if (page_width <= 0 || page_height <= 0) fail(Errc::BadLayout, "page dimensions must be positive");
  check_region(roi, page_width, page_height);
  if (ink_luminance_threshold < 0 || ink_luminance_threshold > 255)
    fail(Errc::BadLayout, "ink_luminance_threshold outside [0,255]");
  if (grid_color_tolerance < 0 || grid_color_tolerance > 255)
    fail(Errc::BadLayout, "grid_color_tolerance outside [0,255]");
  std::array<bool, kLeadCount> seen{};
  for (const auto& b : bands) {
    if (b.x_start > b.x_end || b.row_top > b.row_bottom)
      fail(Errc::BadLayout, std::string("band ") + lead_name(b.lead) + " is degenerate");
    if (b.x_start < 0 || b.x_end >= page_width || b.row_top < 0 || b.row_bottom >= page_height)
      fail(Errc::BadLayout, std::string("band ") + lead_name(b.lead) + " exceeds the page");
    if (seen[static_cast<int>(b.lead)])
      fail(Errc::BadLayout, std::string("duplicate band for lead ") + lead_name(b.lead));
    seen[static_cast<int>(b.lead)] = true;
  }
}

namespace {

std::string trimmed(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  auto b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

Rgb parse_rgb(const std::string& v, int line_no) {
  int r, g, b;
  char c1, c2;
  std::istringstream is(v);
  if (!(is >> r >> c1 >> g >> c2 >> b) || c1 != ',' || c2 != ',' ||
      r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
    fail(Errc::BadLayout, "bad color triple at line " + std::to_string(line_no));
  return Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

int parse_int(const std::string& v, int line_no) {
  try {
    std::size_t pos = 0;
    int n = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    fail(Errc::BadLayout, "bad integer '" + v + "' at line " + std::to_string(line_no));
  }
}

} // namespace

LayoutConfig parse_layout(const std::string& text) {
  LayoutConfig cfg;
  bool have_roi = false;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trimmed(line);
    if (line.empty()) continue;

    if (line.rfind("band", 0) == 0 && line.size() > 4 && std::isspace(static_cast<unsigned char>(line[4]))) {
      std::istringstream bs(line.substr(5));
      std::string lead;
      long xs, xe, rt, rb;
      if (!(bs >> lead >> xs >> xe >> rt >> rb))
        fail(Errc::BadLayout, "bad band line at line " + std::to_string(line_no));
      LeadBand b;
      b.lead = parse_lead(lead);
      b.x_start = static_cast<int>(xs);
      b.x_end = static_cast<int>(xe);
      b.row_top = static_cast<int>(rt);
      b.row_bottom = static_cast<int>(rb);
      cfg.bands.push_back(b);
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::BadLayout, "expected key = value at line " + std::to_string(line_no));
    std::string key = trimmed(line.substr(0, eq));
    std::string val = trimmed(line.substr(eq + 1));
    if (key == "page_width") cfg.page_width = parse_int(val, line_no);
    else if (key == "page_height") cfg.page_height = parse_int(val, line_no);
    else if (key == "ink_threshold") cfg.ink_luminance_threshold = parse_int(val, line_no);
    else if (key == "grid_color") cfg.grid_color = parse_rgb(val, line_no);
    else if (key == "grid_tolerance") cfg.grid_color_tolerance = parse_int(val, line_no);
    else if (key == "roi") {
      std::istringstream rs(val);
      char c;
      if (!(rs >> cfg.roi.x1 >> c >> cfg.roi.y1 >> c >> cfg.roi.x2 >> c >> cfg.roi.y2))
        fail(Errc::BadLayout, "bad roi at line " + std::to_string(line_no));
      have_roi = true;
    } else {
      fail(Errc::BadLayout, "unknown key '" + key + "' at line " + std::to_string(line_no));
    }
  }
  if (!have_roi) {
    cfg.roi = Region{0, 0, cfg.page_width - 1, cfg.page_height - 1};
  }
  cfg.validate();
  return cfg;
}

LayoutConfig load_layout(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::FileNotFound, "cannot open layout file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_layout(ss.str());
}

std::string format_layout(const LayoutConfig& cfg) {
  std::ostringstream os;
  os << "# ecgraph chart layout\n";
  os << "page_width = " << cfg.page_width << "\n";
  os << "page_height = " << cfg.page_height << "\n";
  os << "roi = " << cfg.roi.x1 << "," << cfg.roi.y1 << "," << cfg.roi.x2 << "," << cfg.roi.y2 << "\n";
  os << "ink_threshold = " << cfg.ink_luminance_threshold << "\n";
  os << "grid_color = " << int(cfg.grid_color.r) << "," << int(cfg.grid_color.g) << ","
     << int(cfg.grid_color.b) << "\n";
  os << "grid_tolerance = " << cfg.grid_color_tolerance << "\n";
  os << "# band <lead> <x_start> <x_end> <row_top> <row_bottom>\n";
  for (const auto& b : cfg.bands)
    os << "band " << lead_name(b.lead) << " " << b.x_start << " " << b.x_end << " " << b.row_top
       << " " << b.row_bottom << "\n";
  return os.str();
}

void save_layout(const LayoutConfig& cfg, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::IoError, "cannot write layout file " + path);
  f << format_layout(cfg);
}

LayoutConfig make_standard_layout(int band_width, int band_height, int margin, int col_gap,
                                  int n_cols) {
  if (n_cols != 1 && n_cols != 2 && n_cols != 3 && n_cols != 4)
    fail(Errc::BadLayout, "n_cols must be 1, 2, 3 or 4");
  if (kLeadCount % n_cols != 0) fail(Errc::BadLayout, "12 leads do not tile the column count");
  const int n_rows = kLeadCount / n_cols;

  LayoutConfig cfg;
  cfg.page_width = 2 * margin + n_cols * band_width + (n_cols - 1) * col_gap;
  cfg.page_height = 2 * margin + n_rows * band_height;
  cfg.roi = Region{margin, margin, cfg.page_width - margin - 1, cfg.page_height - margin - 1};

  int li = 0;
  for (int c = 0; c < n_cols; ++c) {
    const int x0 = margin + c * (band_width + col_gap);
    for (int r = 0; r < n_rows; ++r, ++li) {
      LeadBand b;
      b.lead = kAllLeads[static_cast<std::size_t>(li)];
      b.x_start = x0;
      b.x_end = x0 + band_width - 1;
      b.row_top = margin + r * band_height;
      b.row_bottom = b.row_top + band_height - 1;
      cfg.bands.push_back(b);
    }
  }
  cfg.validate();
  return cfg;
}

bool is_grid_colored(Rgb c, Rgb grid, int tolerance) {
  return std::abs(int(c.r) - int(grid.r)) <= tolerance &&
         std::abs(int(c.g) - int(grid.g)) <= tolerance &&
         std::abs(int(c.b) - int(grid.b)) <= tolerance;
}

BinaryRaster binarize(const RasterImage& img, const LayoutConfig& cfg, const Region& roi) {
  check_region(roi, img.width(), img.height());
  BinaryRaster out(img.width(), img.height());
  for (int y = roi.y1; y <= roi.y2; ++y) {
    for (int x = roi.x1; x <= roi.x2; ++x) {
      const Rgb c = img.at(x, y);
      if (luminance(c) > cfg.ink_luminance_threshold) continue;
      if (is_grid_colored(c, cfg.grid_color, cfg.grid_color_tolerance)) continue;
      out.set(x, y, true);
    }
  }
  return out;
}

BinaryRaster binarize(const RasterImage& img, const LayoutConfig& cfg) {
  return binarize(img, cfg, cfg.roi);
}

} // namespace ecgraph
