#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecgraph/train.hpp"
#include "ecgraph/trace.hpp"

namespace ecgraph {

// Channels-last tensor from a multi-lead record: column j is lead j in the
// record's own order.
Tensor record_to_tensor(const SignalRecord& rec);

// One window per annotation, centered on the annotated sample. Samples that
// would fall outside the signal are zero. channels must be non-empty and
// equal-length; annotations must lie inside the signal.
std::vector<Tensor> segment_heartbeats(const std::vector<std::vector<double>>& channels,
                                       const std::vector<long>& annotations, int window = 200);

// Keeps the first `target` rows, zero-extending at the tail if needed.
Tensor crop_or_pad(const Tensor& x, int target);

// Zeroes everything outside rows [start, start+len).
Tensor keep_interval(const Tensor& x, int start, int len);

// Random-erasure copies: each keeps a contiguous interval covering between
// half and all of the rows (all channels cut together) and zeroes the rest.
std::vector<Tensor> augment_zero_fill(const Tensor& x, int n_copies, Rng& rng);

// Two-class benchmark set, length samples per example, single channel.
// Class 0 is a bounded noisy sine (|x| <= 1); class 1 additionally carries
// periodic spikes of magnitude > 3x the class-0 bound. Examples alternate
// class 0, class 1.
Dataset synthetic_task(int n_per_class, int length, std::uint64_t seed);

// Seeded per-class proportional split; second member gets ceil(fraction)
// of each class.
std::pair<Dataset, Dataset> stratified_split(const Dataset& set, double val_fraction,
                                             std::uint64_t seed);

// On-disk dataset: a JSON manifest naming one signal CSV per example.
struct ManifestEntry {
  std::string csv; // path relative to the manifest file
  int label = 0;
};

struct DatasetManifest {
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
};

std::string format_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(const std::string& text);
void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Reads every entry's CSV (resolved against the manifest's directory) and
// fixes each example to `length` rows via crop_or_pad.
Dataset load_dataset(const std::string& manifest_path, int length);

// Annotation stream: "sample,symbol" CSV lines (header optional).
std::vector<std::pair<long, std::string>> load_annotations(const std::string& path);

// Standard five-group beat mapping: N (normal + bundle branch), S
// (supraventricular), V (ventricular), F (fusion), Q (paced/unknown).
// Symbols outside the scheme map to nothing and should be skipped.
std::optional<int> beat_class(const std::string& symbol);
inline constexpr int kBeatClassCount = 5;
const char* beat_class_name(int cls);

} // namespace ecgraph
