#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kvs {

struct ConfigKey {
  std::string key;
  std::string type;  // real, int, bool, string, list
  std::string default_value;
  std::string description;
  std::vector<std::string> subcommands;
};

/// Every key the library understands.
const std::vector<ConfigKey>& config_schema();

/// Keys read by one subcommand, in schema order.
std::vector<ConfigKey> keys_for(std::string_view subcommand);

/**
 * Flat dotted-key configuration parsed from INI-style text:
 *
 *   # comment
 *   [optimizer]
 *   sigma = 7       ->  optimizer.sigma = 7
 *
 * Keys outside a section may be written dotted. Unknown keys are rejected.
 */
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<string>");
  static Config load(const std::filesystem::path& path);

  /// Sets one key, rejecting keys missing from the schema.
  void set(const std::string& key, std::string value);
  /// "section.key=value".
  void apply_override(std::string_view assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  std::optional<double> get_optional_real(const std::string& key) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Splits on `sep` and trims; empty when the key is absent.
  std::vector<std::string> get_list(const std::string& key, char sep = '|') const;
  /// Comma- or whitespace-separated reals.
  std::vector<double> get_reals(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(std::string_view s);

}  // namespace kvs
