#include "ecgraph/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace ecgraph::log {

namespace {

Level parse_env() {
  const char* v = std::getenv("ECGRAPH_LOG");
  if (!v) return Level::Warn;
  std::string s(v);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "error" || s == "0") return Level::Error;
  if (s == "warn" || s == "1") return Level::Warn;
  if (s == "info" || s == "2") return Level::Info;
  if (s == "debug" || s == "3") return Level::Debug;
  return Level::Warn;
}

std::mutex io_mutex;

} // namespace

Level threshold() {
  static const Level lv = parse_env();
  return lv;
}

bool enabled(Level lv) { return static_cast<int>(lv) <= static_cast<int>(threshold()); }

void write(Level lv, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(io_mutex);
  std::cerr << "[ecgraph:" << names[static_cast<int>(lv)] << "] " << msg << "\n";
}

} // namespace ecgraph::log
