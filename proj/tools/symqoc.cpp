#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "symqoc/commands.hpp"

using namespace symqoc;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  bool json = false;
  bool timing = false;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> n;
  std::optional<double> bz;
  std::optional<std::string> coupling;
  std::optional<std::string> control;
  std::optional<std::string> model;

  std::optional<std::string> group;
  std::optional<std::string> mode;
  std::optional<std::string> backend;
  std::optional<double> total;
  std::optional<int> steps;
  std::optional<int> max_iter;
  std::optional<double> target;
  std::optional<std::string> initial_state;
  std::optional<std::string> target_state;
  std::optional<std::string> step_policy;
  bool random_init = false;
  std::optional<double> amplitude;
  std::optional<double> bound;
  std::optional<double> tau;
  bool strang = false;
  std::optional<int> record_every;
  std::optional<std::string> pulses;
  std::optional<int> pad;
  std::optional<std::string> kind;
  std::optional<int> iterations;
  std::optional<int> reps;
};

RunConfig defaults_for(const std::string& command) {
  RunConfig c;
  c.command = command;
  c.out = "";
  if (command == "optimize") c.out = "run";
  if (command == "analyze") c.out = "analysis";
  if (command == "bench") c.out = "bench.csv";
  if (command == "trotter") {
    c.out = "fid.csv";
    c.problem.model.couplings = {kDefaultNearestCoupling};
    c.problem.model.control = ControlMode::per_qubit;
  }
  return c;
}

int single_n(const std::string& s) {
  const auto v = parse_int_list(s, "--n");
  require(v.size() == 1, "--n takes a single qubit count for this command");
  return v.front();
}

RunConfig resolve(const std::string& command, const Flags& f) {
  RunConfig c = defaults_for(command);
  if (!f.config.empty()) {
    std::ifstream is(f.config);
    require(is.good(), "cannot read config " + f.config);
    std::ostringstream text;
    text << is.rdbuf();
    c = RunConfig::from_text(text.str(), c);
  }
  c.command = command;
  if (f.out) c.out = *f.out;
  if (f.timing) c.timing = true;
  if (f.seed) c.problem.init.seed = *f.seed;

  ModelConfig& m = c.problem.model;
  if (f.n) {
    if (command == "bench")
      c.bench.ns = parse_int_list(*f.n, "--n");
    else if (command == "verify")
      c.verify.ns = parse_int_list(*f.n, "--n");
    else
      m.n = single_n(*f.n);
  }
  if (f.bz) m.bz = *f.bz;
  if (f.model) {
    const ModelFamily fam = parse_model_family(*f.model);
    if (command == "bench") {
      c.bench.qoc.family = fam;
      c.bench.trotter.family = fam;
    } else {
      m.couplings = make_model(fam, m.n, m.bz).couplings;
    }
  }
  if (f.coupling) m.couplings = parse_couplings(*f.coupling);
  if (f.control) m.control = parse_control_mode(*f.control);

  if (f.group) {
    if (command == "verify") {
      c.verify.groups.clear();
      for (const auto& g : split_list(*f.group)) c.verify.groups.push_back(parse_group(g));
    } else {
      c.adjoint.group = parse_group(*f.group);
    }
  }
  if (f.mode) {
    if (command == "trotter") {
      require(*f.mode == "serial" || *f.mode == "parallel-approx", "--mode must be serial or parallel-approx");
      c.trotter.mode = *f.mode;
    } else {
      c.adjoint.mode = parse_mode(*f.mode);
    }
  }
  if (f.backend) {
    if (command == "bench") {
      c.bench.backends.clear();
      for (const auto& b : split_list(*f.backend)) c.bench.backends.push_back(parse_backend(b));
    } else {
      c.problem.backend = parse_backend(*f.backend);
    }
  }
  if (f.total) (command == "bench" ? c.bench.qoc.total : c.problem.grid.total) = *f.total;
  if (f.steps) {
    if (command == "trotter")
      c.trotter.steps = *f.steps;
    else if (command == "bench")
      c.bench.qoc.steps = c.bench.trotter.steps = *f.steps;
    else
      c.problem.grid.steps = *f.steps;
  }
  if (f.tau) (command == "bench" ? c.bench.trotter.tau : c.trotter.tau) = *f.tau;
  if (f.max_iter) c.problem.optimizer.max_iterations = *f.max_iter;
  if (f.target) c.problem.optimizer.target = *f.target;
  if (f.initial_state) c.problem.initial_state = *f.initial_state;
  if (f.target_state) c.problem.target_state = *f.target_state;
  if (f.step_policy) c.problem.optimizer.step_policy = parse_step_policy(*f.step_policy);
  if (f.random_init) c.problem.init.random = true;
  if (f.amplitude) c.problem.init.amplitude = *f.amplitude;
  if (f.bound) c.problem.bound = *f.bound;
  if (f.strang) c.trotter.strang = true;
  if (f.record_every) c.trotter.record_every = *f.record_every;
  if (f.pulses) c.analysis.pulses = *f.pulses;
  if (f.pad) c.analysis.pad = *f.pad;
  if (f.kind) {
    require(*f.kind == "qoc" || *f.kind == "trotter", "--kind must be qoc or trotter");
    c.bench.kind = *f.kind;
  }
  if (f.iterations) c.bench.qoc.iterations = *f.iterations;
  if (f.reps) c.bench.qoc.reps = c.bench.trotter.reps = *f.reps;
  c.problem.model.validate();
  return c;
}

void add_common(CLI::App* s, Flags& f) {
  s->add_option("--config", f.config, "key = value config file (flags override it)")->check(CLI::ExistingFile);
  s->add_option("--out", f.out, "output file or directory");
  s->add_flag("--json", f.json, "machine-readable summary on stdout");
  s->add_flag("--timing", f.timing, "record wall-clock times in output files");
  s->add_option("--seed", f.seed, "random seed");
  s->add_option("--n", f.n, "qubit count (bench/verify accept lists such as 3,4 or 3-8)");
  s->add_option("--bz", f.bz, "static field B_z");
  s->add_option("--coupling", f.coupling, "ring couplings k=v,... (k = 1, 2, ...)");
  s->add_option("--control", f.control, "global or perqubit");
  s->add_option("--model", f.model, "uncoupled, nearest or full (sets default couplings)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-reduced qubit optimal control and Trotter simulation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);
  Flags f;

  auto* adj = app.add_subcommand("adjoint", "build an adjoint matrix and write it in coordinate format");
  add_common(adj, f);
  adj->add_option("--group", f.group, "sn or dn");
  adj->add_option("--mode", f.mode, "full or first-block");

  auto* opt = app.add_subcommand("optimize", "gradient-ascent pulse optimization");
  add_common(opt, f);
  opt->add_option("--backend", f.backend, "full, first-block-s or first-block-d");
  opt->add_option("--T", f.total, "total time T");
  opt->add_option("--steps", f.steps, "time steps N");
  opt->add_option("--max-iter", f.max_iter, "iteration budget");
  opt->add_option("--target", f.target, "target transfer probability");
  opt->add_option("--initial-state", f.initial_state, "all-up, all-down or a u/d pattern");
  opt->add_option("--target-state", f.target_state, "all-up, all-down or a u/d pattern");
  opt->add_option("--step-policy", f.step_policy, "fixed or adaptive");
  opt->add_flag("--random-init", f.random_init, "seeded random initial pulses");
  opt->add_option("--amplitude", f.amplitude, "initial pulse amplitude");
  opt->add_option("--bound", f.bound, "amplitude bound");

  auto* tro = app.add_subcommand("trotter", "Trotterized vs exact propagation fidelity");
  add_common(tro, f);
  tro->add_option("--steps", f.steps, "time steps");
  tro->add_option("--tau", f.tau, "step duration");
  tro->add_option("--mode", f.mode, "serial or parallel-approx runtime reporting");
  tro->add_flag("--strang", f.strang, "symmetric second-order splitting");
  tro->add_option("--record-every", f.record_every, "fidelity output stride");

  auto* ana = app.add_subcommand("analyze", "energy cascade and pulse spectrum");
  add_common(ana, f);
  ana->add_option("--pulses", f.pulses, "pulses.csv from optimize");
  ana->add_option("--backend", f.backend, "first-block-s or first-block-d");
  ana->add_option("--pad", f.pad, "zero-padding factor");

  auto* ben = app.add_subcommand("bench", "runtime benchmarks with correctness gate");
  add_common(ben, f);
  ben->add_option("--kind", f.kind, "qoc or trotter");
  ben->add_option("--backend", f.backend, "comma-separated backends");
  ben->add_option("--T", f.total, "total time T");
  ben->add_option("--steps", f.steps, "time steps");
  ben->add_option("--tau", f.tau, "Trotter step duration");
  ben->add_option("--iterations", f.iterations, "optimizer iterations per timed run");
  ben->add_option("--reps", f.reps, "timed repetitions (>= 5)");

  auto* ver = app.add_subcommand("verify", "adjoint, block and projector invariant suite");
  add_common(ver, f);
  ver->add_option("--group", f.group, "comma-separated groups (sn, dn)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig cfg;
  try {
    cfg = resolve(command, f);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (f.json) std::cout << nlohmann::json{{"error", e.what()}, {"exit_code", 1}}.dump(2) << '\n';
    return kExitValidation;
  }
  return run_command(cfg, f.json, std::cout, std::cerr);
}
