#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "ccop/problem.hpp"

namespace ccop::json_io {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

/// 17 significant digits, so every finite double survives a text round trip
/// bit for bit. Non-finite values become the strings "inf", "-inf", "nan".
std::string format_double(double v);

/// Serializes with format_double for all floating-point numbers. indent < 0
/// gives a single line; arrays of scalars are always kept on one line.
std::string dump(const ordered_json& j, int indent = 2);

ordered_json number(double v);
ordered_json to_json(const Vector& v);
ordered_json to_json_row_major(const Matrix& M);

/// Reads a double, accepting the non-finite string spellings of format_double.
double to_double(const json& j, std::string_view field);
Vector to_vector(const json& j, std::string_view field);

}  // namespace ccop::json_io
