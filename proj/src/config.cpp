#include "efilt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "efilt/errors.hpp"

namespace efilt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Kind { integer, real, choice, boolean, text, real_list };

struct Param {
  std::string name;
  Kind kind;
  bool required = false;
  std::optional<std::string> def;
  double lo = -kInf;
  double hi = kInf;
  std::vector<std::string> choices;
};

Param integer(std::string name, double lo, std::optional<std::string> def = {}, bool required = false) {
  return {std::move(name), Kind::integer, required, std::move(def), lo, kInf, {}};
}
Param real(std::string name, double lo, double hi, std::optional<std::string> def = {}, bool required = false) {
  return {std::move(name), Kind::real, required, std::move(def), lo, hi, {}};
}
Param choice(std::string name, std::vector<std::string> options, std::string def) {
  return {std::move(name), Kind::choice, false, std::move(def), -kInf, kInf, std::move(options)};
}

const std::vector<std::string> kGlobals{"command", "seed", "trials", "workers", "format", "output"};

const std::map<std::string, std::vector<Param>>& schemas() {
  static const std::map<std::string, std::vector<Param>> s = [] {
    std::map<std::string, std::vector<Param>> m;
    const Param dist = choice("distribution", {"mixture", "wrapped-gaussian"}, "mixture");
    m["filter"] = {integer("T", 1, {}, true),
                   real("alpha2", 0, 1),
                   real("gamma", 0, kInf),
                   real("length", 0, kInf),
                   {"alphas", Kind::real_list, false, {}, 0, 1, {}},
                   integer("Q", 1, "1"),
                   choice("codec", {"fourier", "hadamard", "collective", "custom"}, "fourier"),
                   {"codec_file", Kind::text, false, {}, -kInf, kInf, {}},
                   {"force", Kind::boolean, false, "false", -kInf, kInf, {}},
                   integer("sources", 1, "1"),
                   real("phi", -kInf, kInf, "0"),
                   choice("noise", {"phase", "internal"}, "phase"),
                   real("module_alpha2", 0, 1),
                   dist};
    m["series"] = {integer("T", 1, {}, true), real("gamma", 0, kInf, {}, true), real("length", 0, kInf, {}, true),
                   integer("Q", 1, "1")};
    m["purify"] = {integer("n", 1, {}, true), integer("m", 1, {}, true), real("p", 0, 1, {}, true),
                   choice("decoder", {"fourier", "hadamard"}, "fourier"), integer("offset", 1, "1")};
    m["protocol1"] = {integer("S", 1, {}, true), integer("R", 1, {}, true), real("p", 0, 1, {}, true),
                      choice("decoder", {"fourier", "hadamard", "random"}, "fourier")};
    m["protocol2"] = {integer("S", 1, {}, true), integer("T", 1, {}, true), real("alpha2", 0, 1, {}, true),
                      {"amplitudes", Kind::real_list, false, {}, -kInf, kInf, {}}};
    m["classical"] = {integer("T", 1, {}, true),
                      real("A", 0, kInf, "1"),
                      choice("kind", {"deterministic", "linear-phase", "linear-amplitude", "nonlinear-phase"},
                             "linear-phase"),
                      real("alpha", 0, 1, "0.9"),
                      dist,
                      real("log_mu", -kInf, kInf, "0"),
                      real("log_sigma", 0, kInf, "0.1"),
                      real("nl_mean", -kInf, kInf, "0"),
                      real("nl_sigma", 0, kInf, "0.1")};
    m["coherent"] = {integer("T", 1, {}, true), real("alpha2", 0, 1, {}, true), real("lambda", 0, kInf, "1"),
                     real("phi", -kInf, kInf, "0"), dist};
    m["compare-codecs"] = {integer("T", 1, {}, true), real("alpha2", 0, 1, "0.8"), integer("Q", 1, "1")};
    m["thresholds"] = {real("fidelity", 0, 1, {}, true)};
    m["reproduce"] = {{"subset", Kind::text, false, "all", -kInf, kInf, {}}};
    return m;
  }();
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::optional<double> to_real(const std::string& s) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<unsigned long long> to_unsigned(const std::string& s) {
  unsigned long long v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::string range_text(const Param& p) {
  std::string r;
  if (p.lo > -kInf) r += " >= " + format_real(p.lo);
  if (p.hi < kInf) r += (r.empty() ? " <= " : " and <= ") + format_real(p.hi);
  return r;
}

std::string normalize_value(const Param& p, const std::string& raw) {
  switch (p.kind) {
    case Kind::integer: {
      const auto v = to_unsigned(raw);
      if (!v || static_cast<double>(*v) < p.lo) {
        throw ConfigError(p.name + " must be an integer" + range_text(p) + ", got '" + raw + "'");
      }
      return std::to_string(*v);
    }
    case Kind::real: {
      const auto v = to_real(raw);
      if (!v || *v < p.lo || *v > p.hi) {
        throw ConfigError(p.name + " must be a real number" + range_text(p) + ", got '" + raw + "'");
      }
      return format_real(*v);
    }
    case Kind::choice:
      if (std::find(p.choices.begin(), p.choices.end(), raw) == p.choices.end()) {
        std::string opts;
        for (const auto& c : p.choices) opts += (opts.empty() ? "" : "|") + c;
        throw ConfigError(p.name + " must be one of " + opts + ", got '" + raw + "'");
      }
      return raw;
    case Kind::boolean:
      if (raw == "true" || raw == "1" || raw == "yes") return "true";
      if (raw == "false" || raw == "0" || raw == "no") return "false";
      throw ConfigError(p.name + " must be true or false, got '" + raw + "'");
    case Kind::text:
      if (raw.empty()) throw ConfigError(p.name + " must not be empty");
      return raw;
    case Kind::real_list: {
      std::string out;
      for (const auto& item : split_list(raw)) {
        const auto v = to_real(item);
        if (!v || *v < p.lo || *v > p.hi) {
          throw ConfigError(p.name + " entries must be real numbers" + range_text(p) + ", got '" + item + "'");
        }
        out += (out.empty() ? "" : ", ") + format_real(*v);
      }
      if (out.empty()) throw ConfigError(p.name + " must not be empty");
      return out;
    }
  }
  throw std::logic_error("unknown parameter kind");
}

const std::vector<Param>& schema_for(const std::string& command) {
  const auto it = schemas().find(command);
  if (it == schemas().end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

const Param* find_param(const std::vector<Param>& schema, const std::string& key) {
  for (const auto& p : schema)
    if (p.name == key) return &p;
  return nullptr;
}

struct Entry {
  std::string key;
  std::string value;
  std::string where;
};

/// Validates values, fills defaults, checks required keys. `swept` keys count as present.
std::map<std::string, std::string> finish_params(const std::string& command, const std::vector<Entry>& entries,
                                                 const std::set<std::string>& swept) {
  const auto& schema = schema_for(command);
  std::map<std::string, std::string> out;
  for (const auto& e : entries) {
    const Param* p = find_param(schema, e.key);
    if (!p) throw ConfigError(e.where + ": unknown key '" + e.key + "' for command '" + command + "'");
    try {
      out[e.key] = normalize_value(*p, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(e.where + ": " + err.what());
    }
  }
  for (const auto& p : schema) {
    if (out.contains(p.name) || swept.contains(p.name)) continue;
    if (p.def) {
      out[p.name] = *p.def;
    } else if (p.required) {
      throw ConfigError("missing required key '" + p.name + "' for command '" + command + "'");
    }
  }
  auto present = [&](const char* k) { return out.contains(k) || swept.contains(k); };
  if (command == "filter") {
    const bool by_length = present("gamma") || present("length");
    if (by_length && !(present("gamma") && present("length"))) {
      throw ConfigError("filter: gamma and length must be given together");
    }
    if (!present("alpha2") && !present("alphas") && !by_length) {
      throw ConfigError("filter: one of alpha2, alphas or gamma+length is required");
    }
    if (out.contains("codec") && out.at("codec") == "custom" && !present("codec_file")) {
      throw ConfigError("filter: codec = custom needs codec_file");
    }
    if (out.contains("noise") && out.at("noise") == "internal" && !present("alpha2")) {
      throw ConfigError("filter: noise = internal needs alpha2");
    }
  }
  return out;
}

std::vector<std::string> expand_axis(const Param& p, const std::string& raw) {
  std::vector<std::string> items;
  if (raw.rfind("linspace(", 0) == 0 && raw.back() == ')') {
    const auto args = split_list(raw.substr(9, raw.size() - 10));
    if (args.size() != 3) throw ConfigError("linspace needs (start, stop, count)");
    const auto a = to_real(args[0]);
    const auto b = to_real(args[1]);
    const auto n = to_unsigned(args[2]);
    if (!a || !b || !n) throw ConfigError("linspace arguments must be numbers");
    if (*n < 2) throw ConfigError("sweep count must be >= 2");
    for (unsigned long long i = 0; i < *n; ++i) {
      const double v = *a + (*b - *a) * static_cast<double>(i) / static_cast<double>(*n - 1);
      items.push_back(p.kind == Kind::integer ? std::to_string(std::llround(v)) : format_real(v));
    }
  } else {
    items = split_list(raw);
  }
  if (items.size() < 2) throw ConfigError("sweep axis '" + p.name + "' needs at least 2 values");
  std::vector<std::string> out;
  for (const auto& it : items) out.push_back(normalize_value(p, it));
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, p);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : schemas()) v.push_back(k);
    v.push_back("sweep");
    return v;
  }();
  return names;
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides,
                       const std::optional<std::string>& command) {
  std::vector<Entry> plain;
  std::vector<Entry> sweep;
  auto add = [&](const std::string& line, const std::string& where, bool in_sweep) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where};
    if (e.key.empty()) throw ConfigError(where + ": empty key");
    (in_sweep ? sweep : plain).push_back(std::move(e));
  };

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool in_sweep = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line == "[command]") {
        in_sweep = false;
      } else if (line == "[sweep]") {
        in_sweep = true;
      } else {
        throw ConfigError(where + ": unknown section " + line);
      }
      continue;
    }
    add(line, where, in_sweep);
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) add(overrides[i], "override " + std::to_string(i + 1), false);

  RunConfig cfg;
  std::vector<Entry> params;
  for (const auto& e : plain) {
    const std::string& k = e.key;
    try {
      if (k == "command") {
        cfg.command = e.value;
      } else if (k == "seed") {
        const auto v = to_unsigned(e.value);
        if (!v) throw ConfigError("seed must be an unsigned 64-bit integer");
        cfg.seed = *v;
      } else if (k == "trials") {
        const auto v = to_unsigned(e.value);
        if (!v) throw ConfigError("trials must be an integer >= 0");
        cfg.trials = static_cast<std::size_t>(*v);
      } else if (k == "workers") {
        const auto v = to_unsigned(e.value);
        if (!v || *v < 1 || *v > 256) throw ConfigError("workers must be an integer in [1, 256]");
        cfg.workers = static_cast<std::size_t>(*v);
      } else if (k == "format") {
        if (e.value == "csv") {
          cfg.format = OutputFormat::csv;
        } else if (e.value == "json") {
          cfg.format = OutputFormat::json;
        } else {
          throw ConfigError("format must be csv or json");
        }
      } else if (k == "output") {
        cfg.output = e.value;
      } else {
        params.push_back(e);
      }
    } catch (const ConfigError& err) {
      throw ConfigError(e.where + ": " + err.what());
    }
  }
  if (command) {
    if (!cfg.command.empty() && cfg.command != *command) {
      throw ConfigError("command '" + *command + "' conflicts with configured command '" + cfg.command + "'");
    }
    cfg.command = *command;
  }
  if (cfg.command.empty()) throw ConfigError("no command given");
  if (cfg.trials == 1) throw ConfigError("trials must be 0 (exact only) or >= 2");

  std::string run_as = cfg.command;
  if (cfg.command == "sweep") {
    auto it = std::find_if(params.begin(), params.end(), [](const Entry& e) { return e.key == "target"; });
    if (it == params.end()) throw ConfigError("command = sweep needs target");
    run_as = it->value;
    if (run_as == "sweep" || run_as == "reproduce" || !schemas().contains(run_as)) {
      throw ConfigError(it->where + ": sweep target must be a computational command, got '" + run_as + "'");
    }
    params.erase(std::remove_if(params.begin(), params.end(), [](const Entry& e) { return e.key == "target"; }),
                 params.end());
  } else if (!sweep.empty()) {
    throw ConfigError("[sweep] section needs command = sweep");
  }

  std::set<std::string> swept;
  const auto& schema = schema_for(run_as);
  for (const auto& e : sweep) {
    const Param* p = find_param(schema, e.key);
    if (!p) throw ConfigError(e.where + ": unknown sweep axis '" + e.key + "' for command '" + run_as + "'");
    if (p->kind == Kind::real_list || p->kind == Kind::text) {
      throw ConfigError(e.where + ": '" + e.key + "' cannot be swept");
    }
    if (!swept.insert(e.key).second) throw ConfigError(e.where + ": duplicate sweep axis '" + e.key + "'");
    try {
      cfg.sweep.push_back({e.key, expand_axis(*p, e.value)});
    } catch (const ConfigError& err) {
      throw ConfigError(e.where + ": " + err.what());
    }
  }
  if (cfg.sweep.size() > 3) throw ConfigError("at most 3 sweep axes are allowed");
  if (cfg.command == "sweep" && cfg.sweep.empty()) throw ConfigError("command = sweep needs a [sweep] section");

  // Swept keys are dropped from the fixed parameters.
  params.erase(std::remove_if(params.begin(), params.end(), [&](const Entry& e) { return swept.contains(e.key); }),
               params.end());
  cfg.params = finish_params(run_as, params, swept);
  if (cfg.command == "sweep") cfg.params["target"] = run_as;
  return cfg;
}

std::map<std::string, std::string> normalize_params(const std::string& command,
                                                    const std::map<std::string, std::string>& raw) {
  std::vector<Entry> entries;
  for (const auto& [k, v] : raw) entries.push_back({k, v, "parameter"});
  return finish_params(command, entries, {});
}

std::string serialize(const RunConfig& cfg) {
  std::ostringstream os;
  os << "[command]\n";
  os << "command = " << cfg.command << '\n';
  os << "format = " << (cfg.format == OutputFormat::csv ? "csv" : "json") << '\n';
  if (!cfg.output.empty()) os << "output = " << cfg.output << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "trials = " << cfg.trials << '\n';
  os << "workers = " << cfg.workers << '\n';
  for (const auto& [k, v] : cfg.params) os << k << " = " << v << '\n';
  if (!cfg.sweep.empty()) {
    os << "\n[sweep]\n";
    for (const auto& axis : cfg.sweep) {
      os << axis.name << " = ";
      for (std::size_t i = 0; i < axis.values.size(); ++i) os << (i ? ", " : "") << axis.values[i];
      os << '\n';
    }
  }
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.output.clear();
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char ch : serialize(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool has(const std::map<std::string, std::string>& p, const std::string& key) { return p.contains(key); }

namespace {
const std::string& need(const std::map<std::string, std::string>& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) throw ConfigError("missing parameter '" + key + "'");
  return it->second;
}
}  // namespace

double get_real(const std::map<std::string, std::string>& p, const std::string& key) {
  const auto v = to_real(need(p, key));
  if (!v) throw ConfigError(key + " is not a number");
  return *v;
}

std::size_t get_size(const std::map<std::string, std::string>& p, const std::string& key) {
  const auto v = to_unsigned(need(p, key));
  if (!v) throw ConfigError(key + " is not an integer");
  return static_cast<std::size_t>(*v);
}

bool get_bool(const std::map<std::string, std::string>& p, const std::string& key) { return need(p, key) == "true"; }

std::string get_text(const std::map<std::string, std::string>& p, const std::string& key) { return need(p, key); }

std::vector<double> get_real_list(const std::map<std::string, std::string>& p, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(need(p, key))) {
    const auto v = to_real(item);
    if (!v) throw ConfigError(key + " entry '" + item + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

}  // namespace efilt
