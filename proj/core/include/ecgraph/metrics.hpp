#pragma once

#include <string>
#include <vector>

#include "ecgraph/errors.hpp"

namespace ecgraph {

// Row = true class, column = predicted class.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<long> counts;

  explicit ConfusionMatrix(int classes = 0)
      : n_classes(classes), counts(std::size_t(classes) * std::size_t(classes), 0) {
    if (classes < 0) fail(Errc::ClassOutOfRange, "negative class count");
  }
  long& at(int true_c, int pred_c) { return counts[idx(true_c, pred_c)]; }
  long at(int true_c, int pred_c) const { return counts[idx(true_c, pred_c)]; }
  long total() const;
  long row_sum(int true_c) const;
  long col_sum(int pred_c) const;

private:
  std::size_t idx(int t, int p) const {
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
      fail(Errc::ClassOutOfRange, "confusion matrix index out of range");
    return std::size_t(t) * std::size_t(n_classes) + std::size_t(p);
  }
};

ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predictions,
                          int n_classes);

// One-vs-rest counts and rates for a single class.
struct ClassMetrics {
  int cls = 0;
  long support = 0; // row sum: examples whose true class this is
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0;    // (tp+tn)/total
  double precision = 0.0;   // tp/(tp+fp)
  double sensitivity = 0.0; // tp/(tp+fn)
  double f1 = 0.0;          // 2tp/(2tp+fp+fn)
  bool precision_undefined = false; // no positive predictions; reported as 0
  bool f1_undefined = false;        // class absent on both sides; reported as 0
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double overall_accuracy = 0.0; // trace/total
  double weighted_accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_sensitivity = 0.0;
  double weighted_f1 = 0.0;
  long total = 0;
};

// EmptyMatrix when the matrix has no observations.
MetricsReport report(const ConfusionMatrix& m);

// Support-weighted mean; LengthMismatch unless both vectors line up, and
// EmptyMatrix when the support total is zero.
double weighted_average(const std::vector<double>& values, const std::vector<long>& supports);

std::string format_report_csv(const MetricsReport& r);
std::string format_report_text(const MetricsReport& r);

// Normalised blue heatmap of the matrix, one cell per class pair, with
// counts rendered as relative intensity row by row.
void save_confusion_heatmap(const std::string& path, const ConfusionMatrix& m, int cell_px = 48);

} // namespace ecgraph
