#include "ecgraph/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "ecgraph/signal_io.hpp"

#include <nlohmann/json.hpp>

namespace ecgraph {

namespace fs = std::filesystem;
using nlohmann::json;

Tensor record_to_tensor(const SignalRecord& rec) {
  if (rec.empty()) fail(Errc::EmptyDataset, "record has no leads");
  std::size_t L = rec.length();
  std::size_t C = rec.leads().size();
  Tensor t({L, C});
  for (std::size_t j = 0; j < C; ++j) {
    const auto& samples = rec.leads()[j].second;
    for (std::size_t i = 0; i < L; ++i) t.at2(i, j) = samples[i];
  }
  return t;
}

std::vector<Tensor> segment_heartbeats(const std::vector<std::vector<double>>& channels,
                                       const std::vector<long>& annotations, int window) {
  if (channels.empty()) fail(Errc::EmptyDataset, "no channels to segment");
  if (window <= 0) fail(Errc::ConfigShapeMismatch, "window must be positive");
  const std::size_t len = channels.front().size();
  for (const auto& ch : channels)
    if (ch.size() != len) fail(Errc::LengthMismatch, "channels differ in length");
  if (len == 0) fail(Errc::EmptyDataset, "channels are empty");

  std::vector<Tensor> out;
  out.reserve(annotations.size());
  const long half = window / 2;
  for (long a : annotations) {
    if (a < 0 || std::size_t(a) >= len)
      fail(Errc::LengthMismatch, "annotation at sample " + std::to_string(a) + " outside signal");
    Tensor t({std::size_t(window), channels.size()});
    for (long i = 0; i < window; ++i) {
      long src = a - half + i;
      if (src < 0 || std::size_t(src) >= len) continue; // stays zero
      for (std::size_t c = 0; c < channels.size(); ++c) t.at2(std::size_t(i), c) = channels[c][std::size_t(src)];
    }
    out.push_back(std::move(t));
  }
  return out;
}

Tensor crop_or_pad(const Tensor& x, int target) {
  if (x.rank() != 2) fail(Errc::ShapeMismatch, "crop_or_pad expects [length, channels]");
  if (target <= 0) fail(Errc::ConfigShapeMismatch, "target length must be positive");
  Tensor out({std::size_t(target), x.cols()});
  std::size_t keep = std::min(x.rows(), std::size_t(target));
  for (std::size_t i = 0; i < keep; ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out.at2(i, j) = x.at2(i, j);
  return out;
}

Tensor keep_interval(const Tensor& x, int start, int len) {
  if (x.rank() != 2) fail(Errc::ShapeMismatch, "keep_interval expects [length, channels]");
  if (start < 0 || len < 0 || std::size_t(start) + std::size_t(len) > x.rows())
    fail(Errc::LengthMismatch, "interval outside tensor rows");
  Tensor out(x.shape());
  for (std::size_t i = std::size_t(start); i < std::size_t(start) + std::size_t(len); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out.at2(i, j) = x.at2(i, j);
  return out;
}

std::vector<Tensor> augment_zero_fill(const Tensor& x, int n_copies, Rng& rng) {
  if (x.rank() != 2) fail(Errc::ShapeMismatch, "augment_zero_fill expects [length, channels]");
  if (n_copies < 0) fail(Errc::ConfigShapeMismatch, "n_copies must be non-negative");
  const std::size_t L = x.rows();
  std::vector<Tensor> out;
  out.reserve(std::size_t(n_copies));
  for (int k = 0; k < n_copies; ++k) {
    // Kept length is uniform over [L/2, L]; position uniform over the fits.
    std::size_t min_len = (L + 1) / 2;
    std::size_t len = min_len + rng.below(L - min_len + 1);
    std::size_t start = rng.below(L - len + 1);
    out.push_back(keep_interval(x, int(start), int(len)));
  }
  return out;
}

Dataset synthetic_task(int n_per_class, int length, std::uint64_t seed) {
  if (n_per_class <= 0 || length <= 0) fail(Errc::EmptyDataset, "empty synthetic task");
  Rng rng = Rng::seeded(seed);
  Dataset set;
  set.reserve(std::size_t(n_per_class) * 2);
  for (int i = 0; i < n_per_class; ++i) {
    for (int label = 0; label < 2; ++label) {
      double amp = rng.uniform(0.5, 0.9);
      double cycles = rng.uniform(2.0, 5.0);
      double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      Tensor x({std::size_t(length), 1});
      for (int t = 0; t < length; ++t)
        x.at2(std::size_t(t), 0) =
            amp * std::sin(2.0 * std::numbers::pi * cycles * t / double(length) + phase) +
            rng.uniform(-0.1, 0.1);
      if (label == 1) {
        // Spikes dominate everything class 0 can produce: |sine+noise| <= 1,
        // spikes are at least 4.
        int stride = 20 + int(rng.below(21));
        int offset = int(rng.below(std::size_t(stride)));
        double spike = rng.uniform(4.0, 6.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        for (int t = offset; t < length; t += stride) x.at2(std::size_t(t), 0) = spike;
      }
      set.push_back({std::move(x), label});
    }
  }
  return set;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& set, double val_fraction,
                                             std::uint64_t seed) {
  if (val_fraction < 0.0 || val_fraction > 1.0)
    fail(Errc::ConfigShapeMismatch, "val_fraction must be within [0,1]");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < set.size(); ++i) by_class[set[i].label].push_back(i);
  Rng rng = Rng::seeded(seed);
  std::vector<std::size_t> train_idx, val_idx;
  for (auto& [label, idx] : by_class) {
    rng.shuffle(idx);
    std::size_t n_val = std::size_t(std::ceil(val_fraction * double(idx.size())));
    n_val = std::min(n_val, idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      (k < n_val ? val_idx : train_idx).push_back(idx[k]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::pair<Dataset, Dataset> out;
  for (auto i : train_idx) out.first.push_back(set[i]);
  for (auto i : val_idx) out.second.push_back(set[i]);
  return out;
}

std::string format_manifest(const DatasetManifest& m) {
  json j;
  j["classes"] = m.class_names;
  j["records"] = json::array();
  for (const auto& e : m.entries) j["records"].push_back({{"csv", e.csv}, {"label", e.label}});
  return j.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::DecodeError, std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.class_names = j.at("classes").get<std::vector<std::string>>();
    for (const auto& r : j.at("records"))
      m.entries.push_back({r.at("csv").get<std::string>(), r.at("label").get<int>()});
  } catch (const json::exception& e) {
    fail(Errc::DecodeError, std::string("manifest is missing fields: ") + e.what());
  }
  for (const auto& e : m.entries)
    if (e.label < 0 || std::size_t(e.label) >= m.class_names.size())
      fail(Errc::LabelOutOfRange, "manifest label " + std::to_string(e.label) +
                                      " has no class name");
  return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  atomic_write_file(path, format_manifest(m));
}

DatasetManifest load_manifest(const std::string& path) { return parse_manifest(read_file(path)); }

Dataset load_dataset(const std::string& manifest_path, int length) {
  DatasetManifest m = load_manifest(manifest_path);
  if (m.entries.empty()) fail(Errc::EmptyDataset, "manifest lists no records");
  fs::path base = fs::path(manifest_path).parent_path();
  Dataset set;
  set.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    // Sample rate is irrelevant here; the tensor carries only values.
    SignalRecord rec = load_signal_csv((base / e.csv).string(), 1.0);
    set.push_back({crop_or_pad(record_to_tensor(rec), length), e.label});
  }
  return set;
}

std::vector<std::pair<long, std::string>> load_annotations(const std::string& path) {
  std::string text = read_file(path);
  std::vector<std::pair<long, std::string>> out;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) fail(Errc::DecodeError, "annotation line without comma: " + line);
    std::string head = line.substr(0, comma);
    std::string symbol = line.substr(comma + 1);
    if (first && head == "sample") { // optional header row
      first = false;
      continue;
    }
    first = false;
    try {
      out.emplace_back(std::stol(head), symbol);
    } catch (const std::exception&) {
      fail(Errc::DecodeError, "annotation sample index is not a number: " + head);
    }
  }
  return out;
}

std::optional<int> beat_class(const std::string& symbol) {
  if (symbol.size() != 1) return std::nullopt;
  switch (symbol[0]) {
  case 'N': case 'L': case 'R': case 'e': case 'j': case '.':
    return 0; // N
  case 'A': case 'a': case 'J': case 'S':
    return 1; // S
  case 'V': case 'E':
    return 2; // V
  case 'F':
    return 3; // F
  case '/': case 'f': case 'Q':
    return 4; // Q
  default:
    return std::nullopt;
  }
}

const char* beat_class_name(int cls) {
  switch (cls) {
  case 0: return "N";
  case 1: return "S";
  case 2: return "V";
  case 3: return "F";
  case 4: return "Q";
  default: fail(Errc::ClassOutOfRange, "beat class " + std::to_string(cls));
  }
}

} // namespace ecgraph
