#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "ecgraph/raster.hpp"
#include "ecgraph/tensor.hpp"

namespace ecgraph::test {

// Fresh directory under the system temp root; unique per call within the
// process so cases cannot trample each other's files.
inline std::string temp_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  auto p = std::filesystem::temp_directory_path() /
           ("ecgraph-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(p);
  return p.string();
}

// '#' (or any non-space, non-dot char) marks an ink pixel.
inline BinaryRaster make_raster(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows.front().size());
  BinaryRaster bin(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      char c = rows[std::size_t(y)][std::size_t(x)];
      bin.set(x, y, c != ' ' && c != '.');
    }
  return bin;
}

// White page with black ink at the marked cells.
inline RasterImage make_image(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = h == 0 ? 0 : static_cast<int>(rows.front().size());
  RasterImage img(w, h, Rgb{255, 255, 255});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      char c = rows[std::size_t(y)][std::size_t(x)];
      if (c != ' ' && c != '.') img.set(x, y, Rgb{0, 0, 0});
    }
  return img;
}

inline bool tensors_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace ecgraph::test
