#include "growth/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

namespace growth {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("config: line " + std::to_string(line) + ": " + what);
}

struct TomlCursor {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_inline_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  void skip_ws_and_comments() {
    while (!done()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        take();
      } else if (c == '#') {
        while (!done() && peek() != '\n') ++pos;
      } else {
        break;
      }
    }
  }
};

std::string parse_bare_key(TomlCursor& cur) {
  std::string key;
  while (!cur.done()) {
    const char c = cur.peek();
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      key += c;
      ++cur.pos;
    } else {
      break;
    }
  }
  if (key.empty()) fail(cur.line, "expected a key");
  return key;
}

nlohmann::json parse_toml_value(TomlCursor& cur);

nlohmann::json parse_toml_array(TomlCursor& cur) {
  nlohmann::json arr = nlohmann::json::array();
  cur.take();  // '['
  for (;;) {
    cur.skip_ws_and_comments();
    if (cur.done()) fail(cur.line, "unterminated array");
    if (cur.peek() == ']') {
      cur.take();
      return arr;
    }
    arr.push_back(parse_toml_value(cur));
    cur.skip_ws_and_comments();
    if (cur.done()) fail(cur.line, "unterminated array");
    if (cur.peek() == ',') {
      cur.take();
    } else if (cur.peek() != ']') {
      fail(cur.line, "expected ',' or ']' in array");
    }
  }
}

nlohmann::json parse_toml_value(TomlCursor& cur) {
  cur.skip_inline_ws();
  if (cur.done()) fail(cur.line, "expected a value");
  const char c = cur.peek();
  if (c == '[') return parse_toml_array(cur);
  if (c == '"') {
    cur.take();
    std::string s;
    while (!cur.done() && cur.peek() != '"') {
      char ch = cur.take();
      if (ch == '\\' && !cur.done()) {
        const char esc = cur.take();
        switch (esc) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: fail(cur.line, "unsupported escape in string");
        }
      } else if (ch == '\n') {
        fail(cur.line - 1, "unterminated string");
      }
      s += ch;
    }
    if (cur.done()) fail(cur.line, "unterminated string");
    cur.take();
    return s;
  }
  std::string token;
  while (!cur.done()) {
    const char ch = cur.peek();
    if (ch == '\n' || ch == '#' || ch == ',' || ch == ']' || ch == ' ' || ch == '\t' || ch == '\r')
      break;
    token += ch;
    ++cur.pos;
  }
  if (token == "true") return true;
  if (token == "false") return false;
  if (token.empty()) fail(cur.line, "expected a value");
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size()) fail(cur.line, "unparseable value \"" + token + "\"");
  if (token.find_first_of(".eE") == std::string::npos && std::fabs(v) < 9.0e15)
    return static_cast<std::int64_t>(v);
  return v;
}

nlohmann::json* descend(nlohmann::json& root, const std::string& dotted, std::size_t line) {
  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot - start);
    if (part.empty()) fail(line, "empty section name component");
    node = &(*node)[part];
    if (node->is_null()) *node = nlohmann::json::object();
    if (!node->is_object()) fail(line, "section name collides with a value");
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

nlohmann::json parse_toml(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  TomlCursor cur{text};
  for (;;) {
    cur.skip_ws_and_comments();
    if (cur.done()) return root;
    if (cur.peek() == '[') {
      cur.take();
      const std::size_t line = cur.line;
      std::string name;
      while (!cur.done() && cur.peek() != ']' && cur.peek() != '\n') name += cur.take();
      if (cur.done() || cur.peek() != ']') fail(line, "unterminated section header");
      cur.take();
      std::string trimmed;
      for (char c : name)
        if (c != ' ' && c != '\t') trimmed += c;
      section = descend(root, trimmed, line);
      continue;
    }
    const std::size_t line = cur.line;
    const std::string key = parse_bare_key(cur);
    cur.skip_inline_ws();
    if (cur.done() || cur.take() != '=') fail(line, "expected '=' after key \"" + key + "\"");
    (*section)[key] = parse_toml_value(cur);
    cur.skip_inline_ws();
    if (!cur.done() && cur.peek() != '\n' && cur.peek() != '#' && cur.peek() != '\r')
      fail(line, "trailing characters after value for \"" + key + "\"");
  }
}

}  // namespace

nlohmann::json parse_config_text(const std::string& text, const std::string& name_hint) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  const bool looks_json = first != std::string::npos && text[first] == '{';
  const bool named_json =
      name_hint.size() >= 5 && name_hint.compare(name_hint.size() - 5, 5, ".json") == 0;
  if (looks_json || named_json) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(std::string("config: ") + e.what());
    }
  }
  return parse_toml(text);
}

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::runtime_error("config: key \"" + key + "\": " + why);
}

double as_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) bad_key(key, "expected a number");
  return v.get<double>();
}

int as_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer()) bad_key(key, "expected an integer");
  return v.get<int>();
}

bool as_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) bad_key(key, "expected a boolean");
  return v.get<bool>();
}

std::vector<double> as_number_array(const nlohmann::json& v, const std::string& key) {
  if (!v.is_array()) bad_key(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad_key(key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

PadMode parse_pad_mode(const std::string& text, const std::string& key) {
  if (text == "repeat_anchor_value") return PadMode::repeat_anchor_value;
  if (text == "repeat_window_max") return PadMode::repeat_window_max;
  if (text == "use_empirical") return PadMode::use_empirical;
  bad_key(key, "unknown pad mode \"" + text + "\"");
}

void apply_pad(const nlohmann::json& v, std::optional<PaddingRule>& pad, PadSide side,
               const std::string& key) {
  if (v.is_null()) {
    pad.reset();
    return;
  }
  if (!v.is_object()) bad_key(key, "expected an object or null");
  PaddingRule rule;
  rule.side = side;
  if (!v.contains("mode") || !v["mode"].is_string()) bad_key(key + ".mode", "required string");
  rule.mode = parse_pad_mode(v["mode"].get<std::string>(), key + ".mode");
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string& k = it.key();
    if (k == "mode") continue;
    if (k == "anchor_age") {
      rule.anchor_age = as_number(it.value(), key + ".anchor_age");
    } else if (k == "source_window") {
      const auto w = as_number_array(it.value(), key + ".source_window");
      if (w.size() != 2) bad_key(key + ".source_window", "expected [lo, hi]");
      rule.source_window = {w[0], w[1]};
    } else if (k == "target_ages") {
      rule.target_ages = as_number_array(it.value(), key + ".target_ages");
    } else {
      bad_key(key + "." + k, "unknown key");
    }
  }
  if (rule.target_ages.empty()) bad_key(key + ".target_ages", "required non-empty array");
  pad = rule;
}

void apply_smoothing(const nlohmann::json& v, SmoothingPolicy& policy) {
  if (!v.is_object()) bad_key("smoothing", "expected an object");
  if (v.contains("preset")) {
    if (!v["preset"].is_string()) bad_key("smoothing.preset", "expected a string");
    policy = SmoothingPolicy::by_name(v["preset"].get<std::string>());
  }
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string& k = it.key();
    if (k == "preset") continue;
    if (k == "window_points") {
      policy.window_points = as_int(it.value(), "smoothing.window_points");
    } else if (k == "local_degree") {
      policy.local_degree = as_int(it.value(), "smoothing.local_degree");
    } else if (k == "window_by_age") {
      if (!it.value().is_array()) bad_key("smoothing.window_by_age", "expected an array");
      policy.window_by_age.clear();
      for (const auto& o : it.value()) {
        WindowOverride w;
        if (o.is_array()) {
          const auto t = as_number_array(o, "smoothing.window_by_age[]");
          if (t.size() != 3) bad_key("smoothing.window_by_age[]", "expected [lo, hi, points]");
          w.age_lo = t[0];
          w.age_hi = t[1];
          w.window_points = static_cast<int>(t[2]);
        } else if (o.is_object()) {
          w.age_lo = as_number(o.at("age_lo"), "smoothing.window_by_age[].age_lo");
          w.age_hi = as_number(o.at("age_hi"), "smoothing.window_by_age[].age_hi");
          w.window_points = as_int(o.at("window_points"), "smoothing.window_by_age[].window_points");
        } else {
          bad_key("smoothing.window_by_age[]", "expected [lo, hi, points] or an object");
        }
        policy.window_by_age.push_back(w);
      }
    } else if (k == "lower_pad") {
      apply_pad(it.value(), policy.lower_pad, PadSide::lower, "smoothing.lower_pad");
    } else if (k == "upper_pad") {
      apply_pad(it.value(), policy.upper_pad, PadSide::upper, "smoothing.upper_pad");
    } else {
      bad_key("smoothing." + k, "unknown key");
    }
  }
  if (v.contains("window_points") || v.contains("local_degree") || v.contains("lower_pad") ||
      v.contains("upper_pad") || v.contains("window_by_age"))
    policy.name = policy.name + "*";  // mark as customized
}

}  // namespace

void apply_chart_config(const nlohmann::json& cfg, ChartConfig& config) {
  if (!cfg.is_object()) throw std::runtime_error("config: top level must be an object/table");
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string& key = it.key();
    const nlohmann::json& v = it.value();
    if (key == "levels") {
      config.levels = as_number_array(v, "levels");
    } else if (key == "grid") {
      if (!v.is_object()) bad_key("grid", "expected an object");
      for (auto g = v.begin(); g != v.end(); ++g) {
        if (g.key() == "start")
          config.output_grid.start = as_number(g.value(), "grid.start");
        else if (g.key() == "end")
          config.output_grid.end = as_number(g.value(), "grid.end");
        else if (g.key() == "step")
          config.output_grid.step = as_number(g.value(), "grid.step");
        else
          bad_key("grid." + g.key(), "unknown key");
      }
    } else if (key == "bins") {
      if (!v.is_object()) bad_key("bins", "expected an object");
      std::optional<double> src_lo, src_hi;
      for (auto b = v.begin(); b != v.end(); ++b) {
        if (b.key() == "start")
          config.bin_start = as_number(b.value(), "bins.start");
        else if (b.key() == "end")
          config.bin_end = as_number(b.value(), "bins.end");
        else if (b.key() == "source_start")
          src_lo = as_number(b.value(), "bins.source_start");
        else if (b.key() == "source_end")
          src_hi = as_number(b.value(), "bins.source_end");
        else
          bad_key("bins." + b.key(), "unknown key");
      }
      if (src_lo.has_value() != src_hi.has_value())
        bad_key("bins", "source_start and source_end must come together");
      if (src_lo) config.source_bins = {{*src_lo, *src_hi}};
    } else if (key == "poly_degree") {
      config.poly_degree = as_int(v, "poly_degree");
    } else if (key == "wlr") {
      if (!v.is_object()) bad_key("wlr", "expected an object");
      for (auto w = v.begin(); w != v.end(); ++w) {
        if (w.key() == "enabled")
          config.wlr_enabled = as_bool(w.value(), "wlr.enabled");
        else if (w.key() == "min_level")
          config.wlr_min_level = as_number(w.value(), "wlr.min_level");
        else if (w.key() == "age_lo")
          config.wlr_age_lo = as_number(w.value(), "wlr.age_lo");
        else
          bad_key("wlr." + w.key(), "unknown key");
      }
    } else if (key == "lm") {
      if (!v.is_object()) bad_key("lm", "expected an object");
      for (auto l = v.begin(); l != v.end(); ++l) {
        if (l.key() == "max_iterations")
          config.lm.max_iterations = as_int(l.value(), "lm.max_iterations");
        else if (l.key() == "tolerance")
          config.lm.tolerance = as_number(l.value(), "lm.tolerance");
        else if (l.key() == "initial_damping")
          config.lm.initial_damping = as_number(l.value(), "lm.initial_damping");
        else
          bad_key("lm." + l.key(), "unknown key");
      }
    } else if (key == "smoothing") {
      apply_smoothing(v, config.smoothing);
    } else {
      bad_key(key, "unknown key");
    }
  }
  config.validate();
}

}  // namespace growth
