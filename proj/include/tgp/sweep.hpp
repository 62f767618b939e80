#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tgp/error.hpp"

namespace tgp {

/// One row of a temperature sweep; metric order is preserved for output.
struct SweepRecord {
  double temperature = 1.0;
  std::vector<std::pair<std::string, double>> metrics;
  std::uint64_t seed = 0;

  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    throw Error(ErrorCode::InvalidArgument, "sweep record has no metric '" + name + "'");
  }
};

/// Index of the best record; ties go to the smallest temperature.
inline std::size_t best_record(std::span<const SweepRecord> records, const std::string& metric, bool minimize) {
  require(!records.empty(), ErrorCode::EmptyInput, "best_record: no records");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double a = records[i].metric(metric);
    const double b = records[best].metric(metric);
    const bool better = minimize ? a < b : a > b;
    if (better || (a == b && records[i].temperature < records[best].temperature)) best = i;
  }
  return best;
}

inline void validate_temperatures(std::span<const double> temperatures) {
  require(!temperatures.empty(), ErrorCode::EmptyInput, "temperature grid is empty");
  for (double t : temperatures)
    require(t > 0.0 && std::isfinite(t), ErrorCode::NonPositiveTemperature, "temperatures must be > 0");
}

/// Log-spaced grid of `count` points from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, int count) {
  require(lo > 0.0 && hi > 0.0 && count >= 1, ErrorCode::InvalidArgument, "log_space: bad arguments");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  return out;
}

}  // namespace tgp
