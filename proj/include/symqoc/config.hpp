#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "symqoc/adjoint.hpp"
#include "symqoc/bench.hpp"
#include "symqoc/qoc.hpp"

namespace symqoc {

inline constexpr const char* kVersion = "0.1.0";

/// Ordered `[section]` + `key = value` text. `#` starts a comment line.
class ConfigDocument {
 public:
  using Entries = std::vector<std::pair<std::string, std::string>>;

  void set(const std::string& section, const std::string& key, std::string value);
  const std::string* find(const std::string& section, const std::string& key) const;
  const std::vector<std::pair<std::string, Entries>>& sections() const { return sections_; }

  std::string to_text() const;
  static ConfigDocument parse(std::istream& is);
  static ConfigDocument parse_text(const std::string& text);

 private:
  std::vector<std::pair<std::string, Entries>> sections_;
};

std::string format_double(double v);
double parse_double(const std::string& s, const std::string& what);
long long parse_integer(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);
std::vector<std::string> split_list(const std::string& s);
std::vector<int> parse_int_list(const std::string& s, const std::string& what);

/// `1=0.2,2=0.1` or `0.2,0.1`; offsets must be 1..K without gaps.
std::vector<double> parse_couplings(const std::string& s);
std::string format_couplings(const std::vector<double>& c);

struct TrotterSettings {
  int steps = 20000;
  double tau = 0.05;
  bool strang = false;
  int record_every = 1;
  std::string mode = "serial";

  friend bool operator==(const TrotterSettings&, const TrotterSettings&) = default;
};

struct AnalysisSettings {
  int pad = 8;
  double threshold = 0.05;
  double separation = 3.0;
  bool hann = true;
  std::string pulses;

  friend bool operator==(const AnalysisSettings&, const AnalysisSettings&) = default;
};

struct AdjointSettings {
  GroupKind group = GroupKind::dihedral;
  AdjointMode mode = AdjointMode::full;

  friend bool operator==(const AdjointSettings&, const AdjointSettings&) = default;
};

struct BenchSettings {
  std::string kind = "qoc";
  std::vector<int> ns{3, 4, 5, 6};
  std::vector<Backend> backends{Backend::full, Backend::first_block_d, Backend::first_block_s};
  QocWorkload qoc;
  TrotterWorkload trotter;

  friend bool operator==(const BenchSettings&, const BenchSettings&) = default;
};

struct VerifySettings {
  std::vector<int> ns{3, 4, 5, 6};
  std::vector<GroupKind> groups{GroupKind::symmetric, GroupKind::dihedral};

  friend bool operator==(const VerifySettings&, const VerifySettings&) = default;
};

/// Everything a subcommand needs; the seed lives in problem.init.seed.
struct RunConfig {
  std::string command;
  std::string version = kVersion;
  std::string out = "out";
  bool timing = false;
  QocProblem problem;
  TrotterSettings trotter;
  AnalysisSettings analysis;
  AdjointSettings adjoint;
  BenchSettings bench;
  VerifySettings verify;

  ConfigDocument to_document() const;
  std::string to_text() const { return to_document().to_text(); }
  /// Starts from `base` and applies every key in `doc`; unknown keys throw.
  static RunConfig from_document(const ConfigDocument& doc, RunConfig base);
  static RunConfig from_document(const ConfigDocument& doc);
  static RunConfig from_text(const std::string& text, RunConfig base);
  static RunConfig from_text(const std::string& text);

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace symqoc
