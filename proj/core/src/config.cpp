#include "fairhil/config.hpp"

#include <fstream>
#include <sstream>

#include "fairhil/data_table.hpp"
#include "fairhil/error.hpp"

namespace fairhil {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double as_number(std::string_view key, std::string_view value) {
  const auto v = parse_number(value);
  if (!v) throw Error(ErrorCode::kValidation, "config key '" + std::string(key) + "' needs a number");
  return *v;
}

std::size_t as_count(std::string_view key, std::string_view value) {
  const double v = as_number(key, value);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw Error(ErrorCode::kValidation, "config key '" + std::string(key) + "' needs a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Config parse_config(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    // '#' inside a quoted value is kept.
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s = s.substr(0, i);
        break;
      }
    }
    s = trim(s);
    if (s.empty() || s.front() == '[') continue;  // blank or table header
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kValidation, "config line " + std::to_string(line_no) + " is not key = value");
    }
    const std::string key(trim(s.substr(0, eq)));
    std::string_view value = trim(s.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    if (key == "host") cfg.host = value;
    else if (key == "port") cfg.port = static_cast<int>(as_count(key, value));
    else if (key == "data_dir") cfg.data_dir = value;
    else if (key == "K" || key == "max_constraints") cfg.max_constraints = as_count(key, value);
    else if (key == "omega") cfg.omega = as_number(key, value);
    else if (key == "lambda") cfg.lambda = as_number(key, value);
    else if (key == "l2" || key == "lambda2") cfg.l2 = as_number(key, value);
    else if (key == "k_max") cfg.k_max = as_count(key, value);
    else if (key == "min_support") cfg.min_support = as_count(key, value);
    else if (key == "test_fraction") cfg.test_fraction = as_number(key, value);
    else if (key == "max_upload_bytes") cfg.max_upload_bytes = as_count(key, value);
    else if (key == "max_rows") cfg.max_rows = as_count(key, value);
    else throw Error(ErrorCode::kValidation, "unknown config key '" + key + "'");
  }
  if (cfg.k_max == 0 || cfg.max_constraints == 0) {
    throw Error(ErrorCode::kValidation, "k_max and K must be positive");
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace fairhil
