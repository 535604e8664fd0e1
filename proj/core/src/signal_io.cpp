#include "ecgraph/signal_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ecgraph {

using nlohmann::json;

std::string format_signal_csv(const SignalRecord& rec) {
  if (rec.empty()) fail(Errc::EmptyTrace, "cannot serialize an empty record");
  std::string out;
  const auto& leads = rec.leads();
  for (std::size_t i = 0; i < leads.size(); ++i) {
    if (i) out += ',';
    out += lead_name(leads[i].first);
  }
  out += '\n';
  char buf[64];
  const std::size_t n = rec.length();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < leads.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof buf, "%.6f", leads[i].second[s]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

SignalRecord parse_signal_csv(const std::string& text, double sample_rate_hz) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) fail(Errc::DecodeError, "empty signal CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<Lead> order;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) order.push_back(parse_lead(cell));
  }
  if (order.empty()) fail(Errc::DecodeError, "signal CSV header has no leads");

  std::vector<std::vector<double>> cols(order.size());
  std::size_t row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(rs, cell, ',')) {
      if (i >= order.size()) fail(Errc::DecodeError, "too many cells at CSV row " + std::to_string(row_no));
      try {
        std::size_t pos = 0;
        cols[i].push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(Errc::DecodeError, "bad number '" + cell + "' at CSV row " + std::to_string(row_no));
      }
      ++i;
    }
    if (i != order.size()) fail(Errc::DecodeError, "short row at CSV row " + std::to_string(row_no));
  }

  SignalRecord rec;
  rec.sample_rate_hz = sample_rate_hz;
  for (std::size_t i = 0; i < order.size(); ++i) rec.add(order[i], std::move(cols[i]));
  return rec;
}

void save_signal_csv(const SignalRecord& rec, const std::string& path) {
  atomic_write_file(path, format_signal_csv(rec));
}

SignalRecord load_signal_csv(const std::string& path, double sample_rate_hz) {
  return parse_signal_csv(read_file(path), sample_rate_hz);
}

std::string format_signal_sidecar(const SignalSidecar& sc) {
  json j;
  j["sample_rate_hz"] = sc.sample_rate_hz;
  j["gain_mv_per_pixel"] = sc.gain_mv_per_pixel;
  j["source_image"] = sc.source_image;
  json gaps = json::object();
  for (const auto& [lead, ranges] : sc.gaps) {
    json arr = json::array();
    for (const auto& [a, b] : ranges) arr.push_back(json::array({a, b}));
    gaps[lead_name(lead)] = std::move(arr);
  }
  j["gaps"] = std::move(gaps);
  return j.dump(2) + "\n";
}

SignalSidecar parse_signal_sidecar(const std::string& text) {
  SignalSidecar sc;
  json j;
  try {
    j = json::parse(text);
    sc.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    sc.gain_mv_per_pixel = j.at("gain_mv_per_pixel").get<double>();
    sc.source_image = j.at("source_image").get<std::string>();
    for (const auto& [key, arr] : j.at("gaps").items()) {
      auto& ranges = sc.gaps[parse_lead(key)];
      for (const auto& pr : arr) ranges.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());
    }
  } catch (const json::exception& e) {
    fail(Errc::DecodeError, std::string("bad signal sidecar: ") + e.what());
  }
  return sc;
}

void save_signal_sidecar(const SignalSidecar& sc, const std::string& path) {
  atomic_write_file(path, format_signal_sidecar(sc));
}

SignalSidecar load_signal_sidecar(const std::string& path) {
  return parse_signal_sidecar(read_file(path));
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(Errc::IoError, "cannot open " + tmp + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) fail(Errc::IoError, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "rename " + tmp + " -> " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Errc::FileNotFound, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace ecgraph
