#pragma once

#include <string>

#include <json.hpp>

#include "mmflow/coupling.hpp"
#include "mmflow/space.hpp"

namespace mmflow {

using json = nlohmann::ordered_json;

// 17 significant digits, trailing zeros trimmed; round-trips exactly.
std::string format_double(double v);

// {"weights": [...], "gauge": [[...]], "name"?}: weights are numbers or exact
// rationals "k/N".
FiniteSpace space_from_json(const json& j);
FiniteSpace read_space_file(const std::string& path);

// Hand-formatted writer so every number carries 17 significant digits.
std::string space_to_json_text(const FiniteSpace& X);
void write_space_file(const FiniteSpace& X, const std::string& path);

json coupling_to_json(const Coupling& c);

// matrices serialize row-major as arrays of rows
json matrix_to_json(int n, const std::vector<double>& row_major);

// +inf-aware wrapper: json has no infinity, so it serializes as the string
// "inf" (and "-inf", "nan").
json number_to_json(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mmflow
