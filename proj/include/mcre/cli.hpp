#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace mcre::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitRuntime = 3;

// A config value that is missing, unknown or out of range. `field` is the
// dotted path, e.g. `model.kind`.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// TOML-style text: top-level `key = value` lines, `[section]` headers, `#`
// comments, quoted strings and bracketed lists such as `n = [50, 100]`.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  const std::string& text() const { return text_; }
  std::string sha256() const;

  bool has(const std::string& path) const;
  std::string get_string(const std::string& path, const std::string& fallback) const;
  std::string require_string(const std::string& path) const;
  double get_double(const std::string& path, double fallback) const;
  std::int64_t get_int(const std::string& path, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& path, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& path, const std::vector<double>& fallback) const;
  // Lists also accept the range form `lo..hi`.
  std::vector<std::int64_t> get_ints(const std::string& path, const std::vector<std::int64_t>& fallback) const;
  std::vector<std::string> get_strings(const std::string& path, const std::vector<std::string>& fallback) const;

  // Rejects any section or key outside the documented schema.
  void validate_schema() const;

 private:
  boost::property_tree::ptree tree_;
  std::string text_;
};

struct RunOptions {
  std::string subcommand;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 0;  // 0 = available parallelism
  std::optional<std::string> out_dir;
};

inline const std::vector<std::string> kSubcommands = {"verify", "couple", "tv", "mix", "var", "fit"};

// Runs one subcommand and writes its CSV files plus manifest.json into the
// output directory. Returns the process exit status; diagnostics go to `err`.
int run(const RunOptions& options, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace mcre::cli
