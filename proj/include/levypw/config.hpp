#pragma once

#include "levypw/lattice.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace levypw {

// Thrown for missing or unreadable files (maps to CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value configuration with typed accessors. Every accessor records
// the key and its effective value, so a run can dump the exact configuration
// it used and reject keys nothing consumed.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  // '#' starts a comment; blank lines ignored; "key = value" with free spacing
  static KeyValueConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  // "size:weight,size:weight,..."
  std::vector<std::pair<double, double>> get_atoms(const std::string& key) const;

  std::vector<std::string> unused_keys() const;
  std::string dump_effective() const; // sorted "key = value" lines

 private:
  std::map<std::string, std::string> kv_;
  mutable std::map<std::string, std::string> effective_;
  mutable std::set<std::string> used_;
};

std::string format_g17(double v); // shortest round-trip decimal, >= 17 significant digits

// Correlation CSV: one row per lag site, minimal-image coordinates first,
// then value and optional standard error.
void write_correlation_csv(std::ostream& out, const Lattice& lat, const Field& value,
                           const Field* se, int max_lag, bool timestamp,
                           const std::vector<std::string>& comments);
void write_correlation_csv(const std::string& path, const Lattice& lat, const Field& value,
                           const Field* se, int max_lag, bool timestamp,
                           const std::vector<std::string>& comments);
struct CorrelationCsv {
  Field value;
  Field se; // empty when the file has no se column
};
CorrelationCsv read_correlation_csv(const std::string& path, const Lattice& lat);

void write_text_file(const std::string& path, const std::string& content);

} // namespace levypw
