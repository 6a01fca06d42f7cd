#include "ccop/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace ccop::json_io {
namespace {

void write_string(std::string& out, const std::string& s) {
  // Reuse the library's escaping for strings.
  out += ordered_json(s).dump();
}

bool is_scalar(const ordered_json& j) { return !j.is_array() && !j.is_object(); }

void write(std::string& out, const ordered_json& j, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(d * indent), ' ');
  };
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_string(out, it.key());
        out += pretty ? ": " : ":";
        write(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool inline_array = std::all_of(j.begin(), j.end(), is_scalar);
      out += '[';
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += inline_array && pretty ? ", " : ",";
        first = false;
        if (!inline_array) newline(depth + 1);
        write(out, el, indent, depth + 1);
      }
      if (!inline_array) newline(depth);
      out += ']';
      return;
    }
    case ordered_json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case ordered_json::value_t::string:
      write_string(out, j.get<std::string>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep floats recognizable as floats when read back by other tools.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump(const ordered_json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

ordered_json number(double v) { return ordered_json(v); }

ordered_json to_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json to_json_row_major(const Matrix& M) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) arr.push_back(M(r, c));
  }
  return arr;
}

double to_double(const json& j, std::string_view field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument(std::string(field) + ": expected a number");
}

Vector to_vector(const json& j, std::string_view field) {
  if (!j.is_array()) throw std::invalid_argument(std::string(field) + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] =
        to_double(j[i], std::string(field) + "[" + std::to_string(i) + "]");
  }
  return v;
}

}  // namespace ccop::json_io
