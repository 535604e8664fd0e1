#include "ecgraph/metrics.hpp"

#include <algorithm>
#include <cstdio>

#include "ecgraph/image_io.hpp"
#include "ecgraph/raster.hpp"

namespace ecgraph {

long ConfusionMatrix::total() const {
  long s = 0;
  for (long c : counts) s += c;
  return s;
}

long ConfusionMatrix::row_sum(int true_c) const {
  long s = 0;
  for (int p = 0; p < n_classes; ++p) s += at(true_c, p);
  return s;
}

long ConfusionMatrix::col_sum(int pred_c) const {
  long s = 0;
  for (int t = 0; t < n_classes; ++t) s += at(t, pred_c);
  return s;
}

ConfusionMatrix confusion(const std::vector<int>& labels, const std::vector<int>& predictions,
                          int n_classes) {
  if (labels.size() != predictions.size())
    fail(Errc::LengthMismatch, "labels and predictions differ in length");
  ConfusionMatrix m(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) m.at(labels[i], predictions[i]) += 1;
  return m;
}

MetricsReport report(const ConfusionMatrix& m) {
  MetricsReport r;
  r.total = m.total();
  if (r.total == 0) fail(Errc::EmptyMatrix, "confusion matrix has no observations");

  long trace = 0;
  std::vector<double> acc, pre, sen, f1;
  std::vector<long> supports;
  for (int c = 0; c < m.n_classes; ++c) {
    ClassMetrics cm;
    cm.cls = c;
    cm.tp = m.at(c, c);
    cm.support = m.row_sum(c);
    cm.fn = cm.support - cm.tp;
    cm.fp = m.col_sum(c) - cm.tp;
    cm.tn = r.total - cm.tp - cm.fn - cm.fp;
    trace += cm.tp;

    cm.accuracy = double(cm.tp + cm.tn) / double(r.total);
    if (cm.tp + cm.fp == 0) {
      cm.precision_undefined = true;
    } else {
      cm.precision = double(cm.tp) / double(cm.tp + cm.fp);
    }
    // A class with no support still gets a row; sensitivity over an empty
    // denominator is reported as 0 like precision.
    cm.sensitivity = cm.support == 0 ? 0.0 : double(cm.tp) / double(cm.support);
    long f1_den = 2 * cm.tp + cm.fp + cm.fn;
    if (f1_den == 0) {
      cm.f1_undefined = true;
    } else {
      cm.f1 = double(2 * cm.tp) / double(f1_den);
    }

    acc.push_back(cm.accuracy);
    pre.push_back(cm.precision);
    sen.push_back(cm.sensitivity);
    f1.push_back(cm.f1);
    supports.push_back(cm.support);
    r.per_class.push_back(cm);
  }
  r.overall_accuracy = double(trace) / double(r.total);
  r.weighted_accuracy = weighted_average(acc, supports);
  r.weighted_precision = weighted_average(pre, supports);
  r.weighted_sensitivity = weighted_average(sen, supports);
  r.weighted_f1 = weighted_average(f1, supports);
  return r;
}

double weighted_average(const std::vector<double>& values, const std::vector<long>& supports) {
  if (values.size() != supports.size())
    fail(Errc::LengthMismatch, "values and supports differ in length");
  double num = 0.0;
  long den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (supports[i] < 0) fail(Errc::ClassOutOfRange, "negative support");
    num += values[i] * double(supports[i]);
    den += supports[i];
  }
  if (den == 0) fail(Errc::EmptyMatrix, "total support is zero");
  return num / double(den);
}

std::string format_report_csv(const MetricsReport& r) {
  std::string out = "class,support,tp,fp,fn,tn,accuracy,precision,sensitivity,f1\n";
  char buf[256];
  for (const auto& c : r.per_class) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f,%.6f\n", c.cls, c.support,
                  c.tp, c.fp, c.fn, c.tn, c.accuracy, c.precision, c.sensitivity, c.f1);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "weighted,%ld,,,,,%.6f,%.6f,%.6f,%.6f\n", r.total,
                r.weighted_accuracy, r.weighted_precision, r.weighted_sensitivity, r.weighted_f1);
  out += buf;
  std::snprintf(buf, sizeof buf, "overall_accuracy,%.6f\n", r.overall_accuracy);
  out += buf;
  return out;
}

std::string format_report_text(const MetricsReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %8s %10s %10s %12s %10s\n", "class", "support", "accuracy",
                "precision", "sensitivity", "f1");
  out += buf;
  for (const auto& c : r.per_class) {
    std::snprintf(buf, sizeof buf, "%-8d %8ld %10.4f %10.4f %12.4f %10.4f%s\n", c.cls, c.support,
                  c.accuracy, c.precision, c.sensitivity, c.f1,
                  c.precision_undefined || c.f1_undefined ? "  (zero denominator)" : "");
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-8s %8ld %10.4f %10.4f %12.4f %10.4f\n", "weighted", r.total,
                r.weighted_accuracy, r.weighted_precision, r.weighted_sensitivity, r.weighted_f1);
  out += buf;
  std::snprintf(buf, sizeof buf, "overall accuracy %.4f\n", r.overall_accuracy);
  out += buf;
  return out;
}

void save_confusion_heatmap(const std::string& path, const ConfusionMatrix& m, int cell_px) {
  if (m.n_classes <= 0) fail(Errc::EmptyMatrix, "heatmap of an empty matrix");
  if (cell_px < 4) cell_px = 4;
  const int border = 2;
  const int side = m.n_classes * cell_px + 2 * border;
  RasterImage img(side, side, {255, 255, 255});
  for (int t = 0; t < m.n_classes; ++t) {
    long rs = m.row_sum(t);
    for (int p = 0; p < m.n_classes; ++p) {
      double frac = rs == 0 ? 0.0 : double(m.at(t, p)) / double(rs);
      // White through saturated blue; diagonal-heavy matrices read as a
      // blue diagonal at a glance.
      auto ch = std::uint8_t(255.0 - 205.0 * frac);
      Rgb color{ch, ch, 255};
      for (int dy = 0; dy < cell_px; ++dy)
        for (int dx = 0; dx < cell_px; ++dx)
          img.set(border + p * cell_px + dx, border + t * cell_px + dy, color);
    }
  }
  save_png(img, path);
}

} // namespace ecgraph
