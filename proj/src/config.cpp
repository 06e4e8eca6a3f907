#include "symqoc/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <sstream>

namespace symqoc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> parse_optional(const std::string& s, const std::string& what) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, what);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::string(fmt(v[i]));
  return out;
}

int to_int(const std::string& s, const std::string& what) {
  const long long v = parse_integer(s, what);
  require(v >= -2147483647LL && v <= 2147483647LL, what + " is out of range");
  return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& s) {
  require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos, "seed must be a non-negative integer");
  errno = 0;
  const auto v = std::strtoull(s.c_str(), nullptr, 10);
  require(errno == 0, "seed is out of range");
  return v;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    auto str = [&](const char* sec, const char* key, std::string RunConfig::*m) {
      v.push_back({sec, key, [m](const RunConfig& c) { return c.*m; }, [m](RunConfig& c, const std::string& s) { c.*m = s; }});
    };
    str("run", "command", &RunConfig::command);
    str("run", "version", &RunConfig::version);
    str("run", "out", &RunConfig::out);
    v.push_back({"run", "seed", [](const RunConfig& c) { return std::to_string(c.problem.init.seed); },
                 [](RunConfig& c, const std::string& s) { c.problem.init.seed = parse_seed(s); }});
    v.push_back({"run", "timing", [](const RunConfig& c) { return std::string(c.timing ? "true" : "false"); },
                 [](RunConfig& c, const std::string& s) { c.timing = parse_bool(s, "run.timing"); }});

    v.push_back({"model", "n", [](const RunConfig& c) { return std::to_string(c.problem.model.n); },
                 [](RunConfig& c, const std::string& s) { c.problem.model.n = to_int(s, "model.n"); }});
    v.push_back({"model", "bz", [](const RunConfig& c) { return format_double(c.problem.model.bz); },
                 [](RunConfig& c, const std::string& s) { c.problem.model.bz = parse_double(s, "model.bz"); }});
    v.push_back({"model", "couplings", [](const RunConfig& c) { return format_couplings(c.problem.model.couplings); },
                 [](RunConfig& c, const std::string& s) { c.problem.model.couplings = parse_couplings(s); }});
    v.push_back({"model", "control", [](const RunConfig& c) { return std::string(control_mode_name(c.problem.model.control)); },
                 [](RunConfig& c, const std::string& s) { c.problem.model.control = parse_control_mode(s); }});

    v.push_back({"grid", "total", [](const RunConfig& c) { return format_double(c.problem.grid.total); },
                 [](RunConfig& c, const std::string& s) { c.problem.grid.total = parse_double(s, "grid.total"); }});
    v.push_back({"grid", "steps", [](const RunConfig& c) { return std::to_string(c.problem.grid.steps); },
                 [](RunConfig& c, const std::string& s) { c.problem.grid.steps = to_int(s, "grid.steps"); }});

    v.push_back({"problem", "initial_state", [](const RunConfig& c) { return c.problem.initial_state; },
                 [](RunConfig& c, const std::string& s) { c.problem.initial_state = s; }});
    v.push_back({"problem", "target_state", [](const RunConfig& c) { return c.problem.target_state; },
                 [](RunConfig& c, const std::string& s) { c.problem.target_state = s; }});
    v.push_back({"problem", "backend", [](const RunConfig& c) { return std::string(backend_name(c.problem.backend)); },
                 [](RunConfig& c, const std::string& s) { c.problem.backend = parse_backend(s); }});
    v.push_back({"problem", "bound", [](const RunConfig& c) { return format_optional(c.problem.bound); },
                 [](RunConfig& c, const std::string& s) { c.problem.bound = parse_optional(s, "problem.bound"); }});

    auto opt_d = [&](const char* key, double OptimizerSettings::*m) {
      v.push_back({"optimizer", key, [m](const RunConfig& c) { return format_double(c.problem.optimizer.*m); },
                   [m, key](RunConfig& c, const std::string& s) {
                     c.problem.optimizer.*m = parse_double(s, std::string("optimizer.") + key);
                   }});
    };
    auto opt_i = [&](const char* key, int OptimizerSettings::*m) {
      v.push_back({"optimizer", key, [m](const RunConfig& c) { return std::to_string(c.problem.optimizer.*m); },
                   [m, key](RunConfig& c, const std::string& s) {
                     c.problem.optimizer.*m = to_int(s, std::string("optimizer.") + key);
                   }});
    };
    opt_i("max_iterations", &OptimizerSettings::max_iterations);
    opt_d("target", &OptimizerSettings::target);
    opt_d("stall_tolerance", &OptimizerSettings::stall_tolerance);
    opt_i("stall_window", &OptimizerSettings::stall_window);
    opt_d("initial_step", &OptimizerSettings::initial_step);
    opt_d("armijo", &OptimizerSettings::armijo);
    opt_d("shrink", &OptimizerSettings::shrink);
    opt_i("max_backtracks", &OptimizerSettings::max_backtracks);
    v.push_back({"optimizer", "step_policy",
                 [](const RunConfig& c) { return std::string(step_policy_name(c.problem.optimizer.step_policy)); },
                 [](RunConfig& c, const std::string& s) { c.problem.optimizer.step_policy = parse_step_policy(s); }});
    opt_d("momentum", &OptimizerSettings::momentum);

    v.push_back({"init", "amplitude", [](const RunConfig& c) { return format_double(c.problem.init.amplitude); },
                 [](RunConfig& c, const std::string& s) { c.problem.init.amplitude = parse_double(s, "init.amplitude"); }});
    v.push_back({"init", "frequency", [](const RunConfig& c) { return format_optional(c.problem.init.frequency); },
                 [](RunConfig& c, const std::string& s) { c.problem.init.frequency = parse_optional(s, "init.frequency"); }});
    v.push_back({"init", "random", [](const RunConfig& c) { return std::string(c.problem.init.random ? "true" : "false"); },
                 [](RunConfig& c, const std::string& s) { c.problem.init.random = parse_bool(s, "init.random"); }});

    v.push_back({"trotter", "steps", [](const RunConfig& c) { return std::to_string(c.trotter.steps); },
                 [](RunConfig& c, const std::string& s) { c.trotter.steps = to_int(s, "trotter.steps"); }});
    v.push_back({"trotter", "tau", [](const RunConfig& c) { return format_double(c.trotter.tau); },
                 [](RunConfig& c, const std::string& s) { c.trotter.tau = parse_double(s, "trotter.tau"); }});
    v.push_back({"trotter", "strang", [](const RunConfig& c) { return std::string(c.trotter.strang ? "true" : "false"); },
                 [](RunConfig& c, const std::string& s) { c.trotter.strang = parse_bool(s, "trotter.strang"); }});
    v.push_back({"trotter", "record_every", [](const RunConfig& c) { return std::to_string(c.trotter.record_every); },
                 [](RunConfig& c, const std::string& s) { c.trotter.record_every = to_int(s, "trotter.record_every"); }});
    v.push_back({"trotter", "mode", [](const RunConfig& c) { return c.trotter.mode; },
                 [](RunConfig& c, const std::string& s) {
                   require(s == "serial" || s == "parallel-approx", "trotter.mode must be serial or parallel-approx");
                   c.trotter.mode = s;
                 }});

    v.push_back({"analysis", "pad", [](const RunConfig& c) { return std::to_string(c.analysis.pad); },
                 [](RunConfig& c, const std::string& s) { c.analysis.pad = to_int(s, "analysis.pad"); }});
    v.push_back({"analysis", "threshold", [](const RunConfig& c) { return format_double(c.analysis.threshold); },
                 [](RunConfig& c, const std::string& s) { c.analysis.threshold = parse_double(s, "analysis.threshold"); }});
    v.push_back({"analysis", "separation", [](const RunConfig& c) { return format_double(c.analysis.separation); },
                 [](RunConfig& c, const std::string& s) { c.analysis.separation = parse_double(s, "analysis.separation"); }});
    v.push_back({"analysis", "hann", [](const RunConfig& c) { return std::string(c.analysis.hann ? "true" : "false"); },
                 [](RunConfig& c, const std::string& s) { c.analysis.hann = parse_bool(s, "analysis.hann"); }});
    v.push_back({"analysis", "pulses", [](const RunConfig& c) { return c.analysis.pulses; },
                 [](RunConfig& c, const std::string& s) { c.analysis.pulses = s; }});

    v.push_back({"adjoint", "group", [](const RunConfig& c) { return std::string(group_name(c.adjoint.group)); },
                 [](RunConfig& c, const std::string& s) { c.adjoint.group = parse_group(s); }});
    v.push_back({"adjoint", "mode", [](const RunConfig& c) { return std::string(mode_name(c.adjoint.mode)); },
                 [](RunConfig& c, const std::string& s) { c.adjoint.mode = parse_mode(s); }});

    v.push_back({"bench", "kind", [](const RunConfig& c) { return c.bench.kind; },
                 [](RunConfig& c, const std::string& s) {
                   require(s == "qoc" || s == "trotter", "bench.kind must be qoc or trotter");
                   c.bench.kind = s;
                 }});
    v.push_back({"bench", "n", [](const RunConfig& c) { return join(c.bench.ns, [](int n) { return std::to_string(n); }); },
                 [](RunConfig& c, const std::string& s) { c.bench.ns = parse_int_list(s, "bench.n"); }});
    v.push_back({"bench", "backends", [](const RunConfig& c) { return join(c.bench.backends, backend_name); },
                 [](RunConfig& c, const std::string& s) {
                   c.bench.backends.clear();
                   for (const auto& b : split_list(s)) c.bench.backends.push_back(parse_backend(b));
                 }});
    v.push_back({"bench", "model", [](const RunConfig& c) { return std::string(model_family_name(c.bench.qoc.family)); },
                 [](RunConfig& c, const std::string& s) { c.bench.qoc.family = parse_model_family(s); }});
    v.push_back({"bench", "total", [](const RunConfig& c) { return format_double(c.bench.qoc.total); },
                 [](RunConfig& c, const std::string& s) { c.bench.qoc.total = parse_double(s, "bench.total"); }});
    v.push_back({"bench", "steps", [](const RunConfig& c) { return std::to_string(c.bench.qoc.steps); },
                 [](RunConfig& c, const std::string& s) { c.bench.qoc.steps = to_int(s, "bench.steps"); }});
    v.push_back({"bench", "iterations", [](const RunConfig& c) { return std::to_string(c.bench.qoc.iterations); },
                 [](RunConfig& c, const std::string& s) { c.bench.qoc.iterations = to_int(s, "bench.iterations"); }});
    v.push_back({"bench", "reps", [](const RunConfig& c) { return std::to_string(c.bench.qoc.reps); },
                 [](RunConfig& c, const std::string& s) {
                   c.bench.qoc.reps = to_int(s, "bench.reps");
                   c.bench.trotter.reps = c.bench.qoc.reps;
                 }});
    v.push_back({"bench", "seed", [](const RunConfig& c) { return std::to_string(c.bench.qoc.seed); },
                 [](RunConfig& c, const std::string& s) { c.bench.qoc.seed = parse_seed(s); }});
    v.push_back({"bench", "trotter_model",
                 [](const RunConfig& c) { return std::string(model_family_name(c.bench.trotter.family)); },
                 [](RunConfig& c, const std::string& s) { c.bench.trotter.family = parse_model_family(s); }});
    v.push_back({"bench", "trotter_steps", [](const RunConfig& c) { return std::to_string(c.bench.trotter.steps); },
                 [](RunConfig& c, const std::string& s) { c.bench.trotter.steps = to_int(s, "bench.trotter_steps"); }});
    v.push_back({"bench", "trotter_tau", [](const RunConfig& c) { return format_double(c.bench.trotter.tau); },
                 [](RunConfig& c, const std::string& s) { c.bench.trotter.tau = parse_double(s, "bench.trotter_tau"); }});

    v.push_back({"verify", "n", [](const RunConfig& c) { return join(c.verify.ns, [](int n) { return std::to_string(n); }); },
                 [](RunConfig& c, const std::string& s) { c.verify.ns = parse_int_list(s, "verify.n"); }});
    v.push_back({"verify", "groups", [](const RunConfig& c) { return join(c.verify.groups, group_name); },
                 [](RunConfig& c, const std::string& s) {
                   c.verify.groups.clear();
                   for (const auto& g : split_list(s)) c.verify.groups.push_back(parse_group(g));
                 }});
    return v;
  }();
  return f;
}

}  // namespace

void ConfigDocument::set(const std::string& section, const std::string& key, std::string value) {
  auto sec = std::find_if(sections_.begin(), sections_.end(), [&](const auto& s) { return s.first == section; });
  if (sec == sections_.end()) {
    sections_.emplace_back(section, Entries{});
    sec = std::prev(sections_.end());
  }
  for (auto& [k, v] : sec->second)
    if (k == key) {
      v = std::move(value);
      return;
    }
  sec->second.emplace_back(key, std::move(value));
}

const std::string* ConfigDocument::find(const std::string& section, const std::string& key) const {
  for (const auto& [name, entries] : sections_)
    if (name == section)
      for (const auto& [k, v] : entries)
        if (k == key) return &v;
  return nullptr;
}

std::string ConfigDocument::to_text() const {
  std::string out;
  for (const auto& [name, entries] : sections_) {
    if (!out.empty()) out += '\n';
    out += "[" + name + "]\n";
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  }
  return out;
}

ConfigDocument ConfigDocument::parse(std::istream& is) {
  ConfigDocument doc;
  std::string line, section;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = "config line " + std::to_string(number) + ": ";
    if (t.front() == '[') {
      require(t.back() == ']' && t.size() > 2, where + "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    require(eq != std::string::npos, where + "expected key = value");
    require(!section.empty(), where + "key outside any [section]");
    const std::string key = trim(t.substr(0, eq));
    require(!key.empty(), where + "empty key");
    require(doc.find(section, key) == nullptr, where + "duplicate key " + section + "." + key);
    doc.set(section, key, trim(t.substr(eq + 1)));
  }
  return doc;
}

ConfigDocument ConfigDocument::parse_text(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  require(!t.empty() && end == t.c_str() + t.size() && errno != ERANGE, what + ": '" + s + "' is not a number");
  require(std::isfinite(v), what + " must be finite");
  return v;
}

long long parse_integer(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  require(!t.empty() && end == t.c_str() + t.size() && errno != ERANGE, what + ": '" + s + "' is not an integer");
  return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError(what + ": '" + s + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) {
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      const int a = to_int(item.substr(0, dash), what), b = to_int(item.substr(dash + 1), what);
      require(a <= b, what + ": empty range " + item);
      for (int n = a; n <= b; ++n) out.push_back(n);
    } else {
      out.push_back(to_int(item, what));
    }
  }
  require(!out.empty(), what + ": empty list");
  return out;
}

std::vector<double> parse_couplings(const std::string& s) {
  std::vector<double> c;
  for (const auto& item : split_list(s)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      c.push_back(parse_double(item, "coupling"));
      continue;
    }
    const int k = to_int(item.substr(0, eq), "coupling offset");
    require(k == static_cast<int>(c.size()) + 1,
            "coupling offsets must be listed as 1, 2, ... in order (got " + std::to_string(k) + ")");
    c.push_back(parse_double(item.substr(eq + 1), "coupling " + std::to_string(k)));
  }
  return c;
}

std::string format_couplings(const std::vector<double>& c) {
  std::string out;
  for (std::size_t k = 0; k < c.size(); ++k) out += (k ? "," : "") + std::to_string(k + 1) + "=" + format_double(c[k]);
  return out;
}

ConfigDocument RunConfig::to_document() const {
  ConfigDocument doc;
  for (const auto& f : fields()) doc.set(f.section, f.key, f.get(*this));
  return doc;
}

RunConfig RunConfig::from_document(const ConfigDocument& doc, RunConfig base) {
  for (const auto& [section, entries] : doc.sections())
    for (const auto& [key, value] : entries) {
      const auto& all = fields();
      auto f = std::find_if(all.begin(), all.end(), [&](const Field& x) { return section == x.section && key == x.key; });
      require(f != all.end(), "unknown config key " + section + "." + key);
      f->set(base, value);
    }
  return base;
}

RunConfig RunConfig::from_text(const std::string& text, RunConfig base) {
  return from_document(ConfigDocument::parse_text(text), std::move(base));
}

RunConfig RunConfig::from_document(const ConfigDocument& doc) { return from_document(doc, RunConfig{}); }

RunConfig RunConfig::from_text(const std::string& text) { return from_text(text, RunConfig{}); }

}  // namespace symqoc
