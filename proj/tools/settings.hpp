#pragma once

// Flat key=value settings with precedence flags > config file > preset.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricl/datagen.hpp"

namespace ricl::cli {

/// Bad invocation: unknown key, malformed value, missing argument. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Command : unsigned {
  kGen = 1u << 0,
  kTrainRicl = 1u << 1,
  kTrainLaricl = 1u << 2,
  kBench = 1u << 3,
  kSweep = 1u << 4,
  kVerify = 1u << 5,
  kPlot = 1u << 6,
  kAll = (1u << 7) - 1,
};

struct KeySpec {
  std::string key;  // config key; the flag is --key with '_' replaced by '-'
  std::string help;
  unsigned commands;
};

/// Every recognised key, in documentation order.
const std::vector<KeySpec>& key_table();
const KeySpec* find_key(const std::string& key);

/// Environment variable holding the default output directory.
inline constexpr const char* kOutDirEnv = "RICL_OUT_DIR";

using KeyValues = std::map<std::string, std::string>;

/// Parses a config file: one `key = value` per line, '#' starts a comment.
/// Throws UsageError on syntax errors or unknown keys, ricl::Error(kIoError)
/// when the file cannot be read.
KeyValues read_config(const std::string& path);
KeyValues parse_config(const std::string& text, const std::string& origin);

class Settings {
 public:
  /// Merges config under flags; out_dir falls back to $RICL_OUT_DIR, then "out".
  static Settings resolve(const KeyValues& config, const KeyValues& flags);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string str(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<std::string> list(const std::string& key) const;

  /// Named preset with any of n, d, m, valid_count, test_count, radius
  /// overridden.
  Preset preset() const;
  std::string out_dir() const { return str("out_dir", "out"); }

 private:
  std::optional<std::string> raw(const std::string& key) const;
  KeyValues values_;
};

}  // namespace ricl::cli
