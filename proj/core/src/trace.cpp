#include "tcpsync/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

namespace tcpsync {

bool Trace::has(const std::string& name) const {
  for (const auto& n : names) {
    if (n == name) return true;
  }
  return false;
}

const std::vector<double>& Trace::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  throw std::out_of_range("trace has no variable '" + name + "'");
}

std::vector<double>& Trace::column(const std::string& name) {
  return const_cast<std::vector<double>&>(std::as_const(*this).column(name));
}

void Trace::add_column(std::string name, std::vector<double> values) {
  if (has(name)) throw std::invalid_argument("duplicate trace variable '" + name + "'");
  if (!columns.empty() && values.size() != size()) {
    throw std::invalid_argument("trace variable '" + name + "' has mismatched length");
  }
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Trace& trace) {
  std::string out = "t";
  for (const auto& n : trace.names) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_double(trace.time(i));
    for (const auto& col : trace.columns) {
      out += ',';
      out += format_double(col[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Trace& trace) {
  nlohmann::json j;
  j["model"] = trace.model;
  j["t0"] = trace.t0;
  j["dt"] = trace.dt;
  j["metadata"] = trace.metadata;
  nlohmann::json vars = nlohmann::json::object();
  for (std::size_t i = 0; i < trace.names.size(); ++i) {
    nlohmann::json arr = nlohmann::json::array();
    for (double v : trace.columns[i]) {
      // JSON has no NaN; undefined samples are written as null.
      if (std::isfinite(v)) {
        arr.push_back(v);
      } else {
        arr.push_back(nullptr);
      }
    }
    vars[trace.names[i]] = std::move(arr);
  }
  j["variables"] = std::move(vars);
  j["order"] = trace.names;
  return j;
}

Trace trace_from_json(const nlohmann::json& j) {
  Trace t;
  t.model = j.at("model").get<std::string>();
  t.t0 = j.at("t0").get<double>();
  t.dt = j.at("dt").get<double>();
  t.metadata = j.value("metadata", nlohmann::json::object());
  const auto& vars = j.at("variables");
  for (const auto& name : j.at("order")) {
    std::vector<double> values;
    for (const auto& v : vars.at(name.get<std::string>())) {
      values.push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
    t.add_column(name.get<std::string>(), std::move(values));
  }
  return t;
}

void write_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << to_csv(trace);
}

void write_json(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << to_json(trace).dump() << '\n';
}

}  // namespace tcpsync
