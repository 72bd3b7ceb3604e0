#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "mcre/cli.hpp"

namespace mcre::cli {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(fmt::format("{}: {}", field, message)), field_(std::move(field)) {}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Drops `#` comments that are not inside a quoted string.
std::string strip_comments(const std::string& text) {
  std::ostringstream out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    char quote = 0;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '#') {
        cut = i;
        break;
      }
    }
    out << line.substr(0, cut) << '\n';
  }
  return out.str();
}

std::vector<std::string> split_list(const std::string& raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') return {};
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = unquote(trim(item));
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_integer(const std::string& s, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec == std::errc() && ptr == s.data() + s.size()) return true;
  // Scientific notation such as 1e6 is accepted when the value is integral.
  double d = 0.0;
  if (!parse_double(s, d) || d != std::floor(d) || std::abs(d) > 9.0e15) return false;
  out = static_cast<std::int64_t>(d);
  return true;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"model", {"kind", "slope", "R", "a", "h", "alpha", "thresholds", "slopes", "intercepts", "sigma", "ell"}},
      {"environment", {"kind", "phi", "sd", "coefficients", "decay", "lag"}},
      {"verify", {"trials", "samples", "assumptions", "y1", "y2", "x"}},
      {"coupling", {"n", "replications", "y", "yp", "direction"}},
      {"estimation",
       {"n", "replications", "y_a", "y_b", "bins", "coords", "bootstrap", "lags", "burn_in", "series", "quantiles",
        "curve", "templates"}},
      {"var", {"losses", "alpha", "a", "h", "checkpoints", "y0", "order"}},
      {"output", {"directory", "formats"}},
  };
  return s;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  c.text_ = text;
  std::istringstream in(strip_comments(text));
  try {
    boost::property_tree::read_ini(in, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", fmt::format("line {}: {}", e.line(), e.message()));
  }
  c.validate_schema();
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", fmt::format("cannot open {}", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void Config::validate_schema() const {
  const auto& s = schema();
  for (const auto& [key, node] : tree_) {
    if (node.empty()) {
      if (key != "seed") throw ConfigError(key, "unknown top-level key");
      continue;
    }
    const auto section = s.find(key);
    if (section == s.end()) throw ConfigError(key, "unknown section");
    for (const auto& [field, value] : node) {
      if (!section->second.count(field)) throw ConfigError(key + "." + field, "unknown key");
      if (!value.empty()) throw ConfigError(key + "." + field, "nested keys are not supported");
    }
  }
}

std::string Config::sha256() const { return sha256_hex(text_); }

bool Config::has(const std::string& path) const { return tree_.get_optional<std::string>(path).has_value(); }

std::string Config::get_string(const std::string& path, const std::string& fallback) const {
  const auto v = tree_.get_optional<std::string>(path);
  return v ? unquote(trim(*v)) : fallback;
}

std::string Config::require_string(const std::string& path) const {
  if (!has(path)) throw ConfigError(path, "required field is missing");
  const std::string v = get_string(path, "");
  if (v.empty()) throw ConfigError(path, "required field is empty");
  return v;
}

double Config::get_double(const std::string& path, double fallback) const {
  if (!has(path)) return fallback;
  double out = 0.0;
  const std::string raw = get_string(path, "");
  if (!parse_double(raw, out)) throw ConfigError(path, fmt::format("expected a finite number, found '{}'", raw));
  return out;
}

std::int64_t Config::get_int(const std::string& path, std::int64_t fallback) const {
  if (!has(path)) return fallback;
  std::int64_t out = 0;
  const std::string raw = get_string(path, "");
  if (!parse_integer(raw, out)) throw ConfigError(path, fmt::format("expected an integer, found '{}'", raw));
  return out;
}

std::uint64_t Config::get_u64(const std::string& path, std::uint64_t fallback) const {
  if (!has(path)) return fallback;
  const std::string raw = get_string(path, "");
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
  if (ec == std::errc() && ptr == raw.data() + raw.size()) return out;
  std::int64_t signed_value = 0;
  if (parse_integer(raw, signed_value) && signed_value >= 0) return static_cast<std::uint64_t>(signed_value);
  throw ConfigError(path, fmt::format("expected an unsigned 64-bit integer, found '{}'", raw));
}

std::vector<double> Config::get_doubles(const std::string& path, const std::vector<double>& fallback) const {
  if (!has(path)) return fallback;
  const std::string raw = get_string(path, "");
  const auto items = split_list(raw);
  if (items.empty()) throw ConfigError(path, fmt::format("expected a nonempty list of numbers, found '{}'", raw));
  std::vector<double> out;
  for (const auto& item : items) {
    double v = 0.0;
    if (!parse_double(item, v)) throw ConfigError(path, fmt::format("'{}' is not a finite number", item));
    out.push_back(v);
  }
  return out;
}

std::vector<std::int64_t> Config::get_ints(const std::string& path,
                                           const std::vector<std::int64_t>& fallback) const {
  if (!has(path)) return fallback;
  const std::string raw = get_string(path, "");
  const auto range = raw.find("..");
  if (range != std::string::npos) {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    if (!parse_integer(trim(raw.substr(0, range)), lo) || !parse_integer(trim(raw.substr(range + 2)), hi) ||
        hi < lo) {
      throw ConfigError(path, fmt::format("malformed range '{}'", raw));
    }
    std::vector<std::int64_t> out;
    for (std::int64_t v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  const auto items = split_list(raw);
  if (items.empty()) throw ConfigError(path, fmt::format("expected a nonempty list of integers, found '{}'", raw));
  std::vector<std::int64_t> out;
  for (const auto& item : items) {
    std::int64_t v = 0;
    if (!parse_integer(item, v)) throw ConfigError(path, fmt::format("'{}' is not an integer", item));
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& path,
                                             const std::vector<std::string>& fallback) const {
  if (!has(path)) return fallback;
  const auto items = split_list(get_string(path, ""));
  if (items.empty()) throw ConfigError(path, "expected a nonempty list");
  return items;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace mcre::cli
