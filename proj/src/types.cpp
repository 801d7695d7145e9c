#include "growth/types.hpp"

#include <algorithm>
#include <cctype>

namespace growth {

std::string to_string(Sex sex) {
  return sex == Sex::male ? "male" : "female";
}

std::string to_string(Measure measure) {
  switch (measure) {
    case Measure::weight: return "weight";
    case Measure::stature: return "stature";
    case Measure::bmi: return "bmi";
  }
  return "?";
}

std::string unit_of(Measure measure) {
  switch (measure) {
    case Measure::weight: return "kg";
    case Measure::stature: return "cm";
    case Measure::bmi: return "kg/m^2";
  }
  return "?";
}

static std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

Sex parse_sex(const std::string& text) {
  const std::string s = lower(text);
  if (s == "m" || s == "male" || s == "1" || s == "boy" || s == "boys") return Sex::male;
  if (s == "f" || s == "female" || s == "2" || s == "girl" || s == "girls") return Sex::female;
  throw std::invalid_argument("unknown sex code: \"" + text + "\"");
}

Measure parse_measure(const std::string& text) {
  const std::string s = lower(text);
  if (s == "weight") return Measure::weight;
  if (s == "stature" || s == "height") return Measure::stature;
  if (s == "bmi") return Measure::bmi;
  throw std::invalid_argument("unknown measure: \"" + text + "\"");
}

}  // namespace growth
