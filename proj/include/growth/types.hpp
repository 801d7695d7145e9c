#pragma once

#include <stdexcept>
#include <string>

namespace growth {

enum class Sex { male, female };
enum class Measure { weight, stature, bmi };

std::string to_string(Sex sex);
std::string to_string(Measure measure);

/// Unit label for a measure ("kg", "cm", "kg/m^2").
std::string unit_of(Measure measure);

/// Parses "m"/"f"/"male"/"female"/"1"/"2", case-insensitive. Throws std::invalid_argument.
Sex parse_sex(const std::string& text);

/// Parses "weight"/"stature"/"bmi". Throws std::invalid_argument.
Measure parse_measure(const std::string& text);

}  // namespace growth
