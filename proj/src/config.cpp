#include "minnorm/config.hpp"

#include <charconv>
#include <fstream>

#include "minnorm/errors.hpp"

namespace minnorm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& source_name) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(source_name + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError(source_name + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  return parse_key_values(in, path);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || b == e)
    throw InputError("invalid number for " + key + ": '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e || b == e)
    throw InputError("invalid integer for " + key + ": '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw InputError("invalid boolean for " + key + ": '" + text + "'");
}

std::vector<Index> parse_index_list(const std::string& text) {
  const std::string t = trim(text);
  std::vector<Index> out;
  if (t.find(':') != std::string::npos) {
    std::vector<long long> parts;
    std::size_t start = 0;
    for (;;) {
      const auto pos = t.find(':', start);
      parts.push_back(parse_integer("n1_grid", trim(t.substr(start, pos - start))));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0])
      throw InputError("range must be start:stop:step with step > 0 and stop >= start");
    for (long long v = parts[0]; v <= parts[1]; v += parts[2]) out.push_back(v);
    return out;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = t.find(',', start);
    const std::string item = trim(t.substr(start, pos == std::string::npos ? pos : pos - start));
    if (!item.empty()) out.push_back(parse_integer("n1_grid", item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw InputError("empty index list");
  return out;
}

void apply_experiment_keys(ExperimentConfig& cfg, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "design") cfg.design = parse_design(value);
    else if (key == "p") cfg.p = parse_integer(key, value);
    else if (key == "n2") cfg.n2 = parse_integer(key, value);
    else if (key == "n1_grid") cfg.n1_grid = parse_index_list(value);
    else if (key == "snr") cfg.snr = parse_double(key, value);
    else if (key == "ssr") cfg.ssr = parse_double(key, value);
    else if (key == "kappa") cfg.kappa = parse_double(key, value);
    else if (key == "sigma_sq") cfg.sigma_sq = parse_double(key, value);
    else if (key == "reps") {
      const long long r = parse_integer(key, value);
      if (r < 0) throw InputError("reps must be nonnegative");
      cfg.reps = static_cast<std::size_t>(r);
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), s);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size() || value.empty())
        throw InputError("invalid seed '" + value + "'");
      cfg.seed = s;
    } else if (key == "raw_fig2_scaling") cfg.raw_fig2_scaling = parse_bool(key, value);
    else if (key == "threads") {
      const long long t = parse_integer(key, value);
      if (t < 0) throw InputError("threads must be nonnegative");
      cfg.threads = static_cast<unsigned>(t);
    } else throw InputError("unknown config key '" + key + "'");
  }
}

}  // namespace minnorm
