#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tcpsync {

// Uniformly sampled multi-variable time series. All columns have equal length;
// sample i sits at t0 + i*dt.
struct Trace {
  std::string model;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return columns.empty() ? 0 : columns.front().size(); }
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  double duration() const { return size() < 2 ? 0.0 : dt * static_cast<double>(size() - 1); }

  bool has(const std::string& name) const;
  // Throws std::out_of_range for an unknown name.
  const std::vector<double>& column(const std::string& name) const;
  std::vector<double>& column(const std::string& name);
  // Appends a column; throws std::invalid_argument on a length mismatch or duplicate name.
  void add_column(std::string name, std::vector<double> values);
};

// CSV: header "t,<names...>", one row per sample, values printed with 17
// significant digits so the output is bit-reproducible.
std::string to_csv(const Trace& trace);
nlohmann::json to_json(const Trace& trace);
Trace trace_from_json(const nlohmann::json& j);

void write_csv(const Trace& trace, const std::filesystem::path& path);
void write_json(const Trace& trace, const std::filesystem::path& path);

// Shortest-round-trip-safe decimal representation used by all writers.
std::string format_double(double v);

}  // namespace tcpsync
