#include "levypw/config.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace levypw {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid number for " + key + ": '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid integer for " + key + ": '" + v + "'");
}

} // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    cfg.set(key, value);
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& def) const {
  used_.insert(key);
  auto it = kv_.find(key);
  std::string v = it == kv_.end() ? def : it->second;
  effective_[key] = v;
  return v;
}

double KeyValueConfig::get_double(const std::string& key, double def) const {
  used_.insert(key);
  auto it = kv_.find(key);
  double v = it == kv_.end() ? def : parse_double(key, it->second);
  effective_[key] = format_g17(v);
  return v;
}

long long KeyValueConfig::get_int(const std::string& key, long long def) const {
  used_.insert(key);
  auto it = kv_.find(key);
  long long v = it == kv_.end() ? def : parse_int(key, it->second);
  effective_[key] = std::to_string(v);
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool def) const {
  used_.insert(key);
  auto it = kv_.find(key);
  bool v = def;
  if (it != kv_.end()) {
    const std::string& s = it->second;
    if (s == "1" || s == "true" || s == "yes" || s == "on")
      v = true;
    else if (s == "0" || s == "false" || s == "no" || s == "off")
      v = false;
    else
      throw ConfigError("invalid boolean for " + key + ": '" + s + "'");
  }
  effective_[key] = v ? "true" : "false";
  return v;
}

std::vector<std::pair<double, double>> KeyValueConfig::get_atoms(const std::string& key) const {
  used_.insert(key);
  auto it = kv_.find(key);
  if (it == kv_.end() || trim(it->second).empty()) {
    effective_[key] = "";
    return {};
  }
  std::vector<std::pair<double, double>> atoms;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("atom entries need size:weight, got '" + item + "'");
    atoms.emplace_back(parse_double(key, trim(item.substr(0, colon))),
                       parse_double(key, trim(item.substr(colon + 1))));
  }
  std::string canon;
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (i) canon += ",";
    canon += format_g17(atoms[i].first) + ":" + format_g17(atoms[i].second);
  }
  effective_[key] = canon;
  return atoms;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::string KeyValueConfig::dump_effective() const {
  std::string out;
  for (const auto& [k, v] : effective_) out += k + " = " + v + "\n";
  return out;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<int> min_image(const Lattice& lat, long long site) {
  auto c = lat.coords(site);
  for (int& x : c)
    if (x > lat.extent() / 2) x -= lat.extent();
  return c;
}

bool in_window(const std::vector<int>& mic, int max_lag) {
  if (max_lag < 0) return true;
  for (int x : mic)
    if (x > max_lag || x < -max_lag) return false;
  return true;
}

} // namespace

void write_correlation_csv(std::ostream& out, const Lattice& lat, const Field& value,
                           const Field* se, int max_lag, bool timestamp,
                           const std::vector<std::string>& comments) {
  for (const auto& cm : comments) out << "# " << cm << "\n";
  if (timestamp) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated " << buf << "\n";
  }
  for (int j = 0; j < lat.dim(); ++j) out << "x" << j << ",";
  out << "value";
  if (se) out << ",se";
  out << "\n";
  for (long long i = 0; i < lat.sites(); ++i) {
    auto mic = min_image(lat, i);
    if (!in_window(mic, max_lag)) continue;
    for (int x : mic) out << x << ",";
    out << format_g17(value[(size_t)i]);
    if (se) out << "," << format_g17((*se)[(size_t)i]);
    out << "\n";
  }
}

void write_correlation_csv(const std::string& path, const Lattice& lat, const Field& value,
                           const Field* se, int max_lag, bool timestamp,
                           const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  write_correlation_csv(out, lat, value, se, max_lag, timestamp, comments);
  if (!out) throw IoError("failed writing " + path);
}

CorrelationCsv read_correlation_csv(const std::string& path, const Lattice& lat) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(trim(cell));
    break;
  }
  int d = lat.dim();
  bool ok = (int)header.size() >= d + 1;
  for (int j = 0; ok && j < d; ++j) ok = header[(size_t)j] == "x" + std::to_string(j);
  ok = ok && header[(size_t)d] == "value";
  bool has_se = ok && header.size() == (size_t)d + 2 && header[(size_t)d + 1] == "se";
  if (!ok || ((int)header.size() > d + 1 && !has_se))
    throw ConfigError("unexpected correlation CSV header in " + path);

  CorrelationCsv out;
  out.value.assign((size_t)lat.sites(), 0.0);
  if (has_se) out.se.assign((size_t)lat.sites(), 0.0);
  std::vector<char> filled((size_t)lat.sites(), 0);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if ((int)cells.size() != d + 1 + (has_se ? 1 : 0))
      throw ConfigError("malformed correlation CSV row in " + path + ": " + line);
    std::vector<int> c(d);
    for (int j = 0; j < d; ++j) c[(size_t)j] = (int)parse_int("x" + std::to_string(j), cells[(size_t)j]);
    long long site = lat.index(c);
    out.value[(size_t)site] = parse_double("value", cells[(size_t)d]);
    if (has_se) out.se[(size_t)site] = parse_double("se", cells[(size_t)d + 1]);
    filled[(size_t)site] = 1;
  }
  for (long long i = 0; i < lat.sites(); ++i)
    if (!filled[(size_t)i])
      throw ConfigError("correlation CSV does not cover the full lag grid: " + path);
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

} // namespace levypw
