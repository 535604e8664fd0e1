#pragma once

#include <map>
#include <string>
#include <vector>

#include "ecgraph/trace.hpp"

namespace ecgraph {

// CSV layout: header row of lead ids, one column per lead, one row per
// sample, values fixed to six decimals with '.' as the decimal separator,
// '\n' line endings, trailing newline.
std::string format_signal_csv(const SignalRecord& rec);
SignalRecord parse_signal_csv(const std::string& text, double sample_rate_hz);

void save_signal_csv(const SignalRecord& rec, const std::string& path);
SignalRecord load_signal_csv(const std::string& path, double sample_rate_hz);

struct SignalSidecar {
  double sample_rate_hz = 0.0;
  double gain_mv_per_pixel = 0.0;
  std::string source_image;
  std::map<Lead, std::vector<std::pair<int, int>>> gaps;
};

std::string format_signal_sidecar(const SignalSidecar& sc);
SignalSidecar parse_signal_sidecar(const std::string& text);
void save_signal_sidecar(const SignalSidecar& sc, const std::string& path);
SignalSidecar load_signal_sidecar(const std::string& path);

// Writes to a sibling temp file, then renames over the target.
void atomic_write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path); // FileNotFound

} // namespace ecgraph
