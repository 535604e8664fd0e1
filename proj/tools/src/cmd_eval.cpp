#include <algorithm>
#include <cctype>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ecgraph/checkpoint.hpp"
#include "ecgraph/datasets.hpp"
#include "ecgraph/metrics.hpp"
#include "ecgraph/signal_io.hpp"

namespace ecgraph::cli {
namespace {

struct EvalOpts {
  std::string model;
  std::string manifest;
  std::string preds; // "label,pred" CSV; bypasses the model
  int classes = 0;   // 0: derive from model or data
  std::string out_prefix = "eval";
  std::string dump_preds;
};

// "label,pred" rows, optional header. Returns (labels, predictions).
std::pair<std::vector<int>, std::vector<int>> parse_pred_dump(const std::string& text) {
  std::vector<int> labels, preds;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const bool numeric = std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-';
    if (first && !numeric) {
      first = false;
      continue; // header
    }
    first = false;
    int l = 0, p = 0;
    if (std::sscanf(line.c_str(), "%d,%d", &l, &p) != 2)
      fail(Errc::DecodeError, "bad prediction row: " + line);
    labels.push_back(l);
    preds.push_back(p);
  }
  return {labels, preds};
}

std::string format_pred_dump(const std::vector<int>& labels, const std::vector<int>& preds) {
  std::string out = "label,pred\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out += std::to_string(labels[i]) + "," + std::to_string(preds[i]) + "\n";
  return out;
}

std::string format_confusion_csv(const ConfusionMatrix& m) {
  std::ostringstream out;
  out << "true\\pred";
  for (int p = 0; p < m.n_classes; ++p) out << "," << p;
  out << "\n";
  for (int t = 0; t < m.n_classes; ++t) {
    out << t;
    for (int p = 0; p < m.n_classes; ++p) out << "," << m.at(t, p);
    out << "\n";
  }
  return out.str();
}

int run_eval(const EvalOpts& o) {
  try {
    std::vector<int> labels, preds;
    int n_classes = o.classes;

    if (!o.preds.empty()) {
      std::tie(labels, preds) = parse_pred_dump(read_file(o.preds));
      if (n_classes == 0) {
        for (int v : labels) n_classes = std::max(n_classes, v + 1);
        for (int v : preds) n_classes = std::max(n_classes, v + 1);
      }
    } else {
      if (o.model.empty() || o.manifest.empty()) {
        std::fprintf(stderr, "eval: need --preds, or --model together with --data\n");
        return 1;
      }
      LoadedModel lm = load_checkpoint(o.model);
      if (n_classes == 0) n_classes = lm.config.n_classes;
      Dataset set = load_dataset(o.manifest, lm.config.input_length);
      labels.reserve(set.size());
      preds.reserve(set.size());
      for (const auto& ex : set) {
        labels.push_back(ex.label);
        preds.push_back(predict_class(lm.config, lm.params, ex.x));
      }
    }

    ConfusionMatrix cm = confusion(labels, preds, n_classes);
    MetricsReport rep = report(cm);

    const std::string text = format_report_text(rep);
    std::fputs(text.c_str(), stdout);
    atomic_write_file(o.out_prefix + ".report.csv", format_report_csv(rep));
    atomic_write_file(o.out_prefix + ".report.txt", text);
    atomic_write_file(o.out_prefix + ".confusion.csv", format_confusion_csv(cm));
    save_confusion_heatmap(o.out_prefix + ".confusion.png", cm);
    if (!o.dump_preds.empty()) atomic_write_file(o.dump_preds, format_pred_dump(labels, preds));
    std::printf("wrote %s.report.{csv,txt}, %s.confusion.{csv,png}\n", o.out_prefix.c_str(),
                o.out_prefix.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "eval: %s\n", e.what());
    return 1;
  }
}

} // namespace

void add_eval_command(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<EvalOpts>();
  CLI::App* cmd = app.add_subcommand("eval", "Score predictions and write metric reports");
  cmd->add_option("--model", o->model, "checkpoint file");
  cmd->add_option("--data", o->manifest, "dataset manifest JSON");
  cmd->add_option("--preds", o->preds, "label,pred CSV to score instead of running the model");
  cmd->add_option("--classes", o->classes, "class count (default: from model or data)");
  cmd->add_option("-o,--out-prefix", o->out_prefix, "prefix for report files")
      ->capture_default_str();
  cmd->add_option("--dump-preds", o->dump_preds, "also write the label,pred rows here");
  cmd->callback([o, &exit_code] { exit_code = run_eval(*o); });
}

} // namespace ecgraph::cli
