#include "symqoc/commands.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "symqoc/analysis.hpp"
#include "symqoc/env.hpp"
#include "symqoc/trotter.hpp"
#include "symqoc/verify.hpp"

namespace symqoc {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

bool is_directory_command(const std::string& c) { return c == "optimize" || c == "analyze"; }

std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  require(os.good(), "cannot write " + p.string());
  return os;
}

void write_resolved(const RunConfig& cfg) {
  RunConfig resolved = cfg;
  resolved.version = kVersion;
  auto os = open_output(resolved_config_path(cfg));
  os << resolved.to_text();
}

std::string g17(double v) { return format_double(v); }

void print_text(std::ostream& out, const json& summary) {
  for (const auto& [k, v] : summary.items()) out << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

json run_adjoint(const RunConfig& cfg) {
  const int n = cfg.problem.model.n;
  const AdjointMatrix a = build_adjoint(n, cfg.adjoint.group, cfg.adjoint.mode);
  json s{{"command", "adjoint"},
         {"n", n},
         {"group", group_name(cfg.adjoint.group)},
         {"mode", mode_name(cfg.adjoint.mode)},
         {"rows", a.rows()},
         {"cols", a.cols()},
         {"nnz", a.matrix.nonZeros()},
         {"first_block", a.blocks.first()},
         {"blocks", a.blocks.sizes}};
  if (!cfg.out.empty()) {
    const fs::path p(cfg.out);
    {
      auto os = open_output(p);
      write_coordinate(os, a.matrix);
    }
    {
      auto os = open_output(p.string() + ".blocks");
      os << a.blocks.to_text();
    }
    write_resolved(cfg);
    s["output"] = p.string();
  }
  return s;
}

json run_optimize(const RunConfig& cfg, int& code) {
  const QocProblem& p = cfg.problem;
  p.validate();
  const QocResult r = optimize(p);
  double total_ms = 0.0;
  for (double w : r.wall_ms) total_ms += w;
  json s{{"command", "optimize"},
         {"n", p.model.n},
         {"backend", backend_name(r.backend)},
         {"stop_reason", r.stop_reason},
         {"iterations", r.iterations()},
         {"final_objective", r.final_objective()},
         {"iterations_to_0.99", r.iterations_to_reach(0.99)}};
  if (cfg.timing) s["wall_ms"] = total_ms;
  if (!cfg.out.empty()) {
    const fs::path dir(cfg.out);
    {
      auto os = open_output(dir / "pulses.csv");
      write_pulses_csv(os, r.schedule);
    }
    {
      auto os = open_output(dir / "trace.csv");
      write_trace_csv(os, r, cfg.timing);
    }
    ConfigDocument res;
    res.set("result", "version", kVersion);
    res.set("result", "backend", backend_name(r.backend));
    res.set("result", "stop_reason", r.stop_reason);
    res.set("result", "iterations", std::to_string(r.iterations()));
    res.set("result", "final_objective", g17(r.final_objective()));
    res.set("result", "iterations_to_0.99", std::to_string(r.iterations_to_reach(0.99)));
    res.set("result", "seed", std::to_string(p.init.seed));
    res.set("result", "wall_ms", g17(cfg.timing ? total_ms : 0.0));
    {
      auto os = open_output(dir / "result.cfg");
      os << res.to_text();
    }
    write_resolved(cfg);
    s["output"] = dir.string();
  }
  if (r.stop_reason != "target") code = kExitNumerical;
  return s;
}

json run_trotter(const RunConfig& cfg) {
  const ModelConfig& m = cfg.problem.model;
  const auto& t = cfg.trotter;
  require(t.steps >= 1, "trotter.steps must be positive");
  const auto plan = plan_per_qubit_coupled(m, t.tau, t.strang);
  const PulseSchedule s = benchmark_controls(m.n, m.bz, t.steps, t.tau);
  const FidelityRun run = trotter_fidelity(plan, ExactStepper(m), s, t.record_every, worker_threads());
  const double per_step = run.trotter_ms / t.steps / (t.mode == "parallel-approx" ? m.n : 1);
  json out{{"command", "trotter"},        {"n", m.n},
           {"steps", t.steps},            {"tau", t.tau},
           {"strang", t.strang},          {"min_fidelity", run.min_fidelity},
           {"final_fidelity", run.final_fidelity},
           {"mode", t.mode},              {"trotter_ms_per_step", per_step},
           {"exact_ms_per_step", run.exact_ms / t.steps}};
  if (t.mode == "parallel-approx") out["note"] = "Trotter runtime divided by n (approximation)";
  if (!cfg.out.empty()) {
    auto os = open_output(cfg.out);
    write_fidelity_csv(os, run);
    write_resolved(cfg);
    out["output"] = cfg.out;
  }
  return out;
}

json run_analyze(const RunConfig& cfg) {
  const ModelConfig& m = cfg.problem.model;
  const EnergyCascade c = energy_cascade(m, cfg.problem.backend);
  const auto gaps = distinct_gaps(c);
  json s{{"command", "analyze"}, {"n", m.n}, {"distinct_gaps", gaps.size()}, {"gaps", gaps}};
  const fs::path dir(cfg.out);
  if (!cfg.out.empty()) {
    auto os = open_output(dir / "cascade.csv");
    write_cascade_csv(os, c);
  }
  if (!cfg.analysis.pulses.empty()) {
    std::ifstream is(cfg.analysis.pulses);
    require(is.good(), "cannot read pulses file " + cfg.analysis.pulses);
    const PulseSchedule sched = read_pulses_csv(is);
    PeakSettings ps{cfg.analysis.threshold, cfg.analysis.separation, cfg.analysis.hann};
    const PowerSpectrum p = power_spectrum(sched, cfg.analysis.pad, 0, ps);
    json peaks = json::array();
    for (const auto& mt : match_peaks(p.peaks_x, gaps, p.bin))
      peaks.push_back({{"frequency", mt.peak}, {"nearest_gap", mt.gap}, {"distance_bins", mt.distance_bins}});
    s["bin"] = p.bin;
    s["peaks_x"] = peaks;
    if (!p.peaks_x.empty()) s["phase_lag"] = phase_lag(p);
    if (!cfg.out.empty()) {
      auto os = open_output(dir / "spectrum.csv");
      write_spectrum_csv(os, p);
    }
  }
  if (!cfg.out.empty()) {
    write_resolved(cfg);
    s["output"] = dir.string();
  }
  return s;
}

json records_json(const std::vector<BenchRecord>& recs) {
  json a = json::array();
  for (const auto& r : recs)
    a.push_back({{"n", r.n},
                 {"backend", r.label},
                 {"median_ns", r.stats.median_ns},
                 {"mean_ns", r.stats.mean_ns},
                 {"min_ns", r.stats.min_ns},
                 {"reps", r.stats.reps},
                 {"steps", r.steps},
                 {"tau", r.tau},
                 {"seed", r.seed},
                 {"note", r.note}});
  return a;
}

json run_bench(const RunConfig& cfg) {
  const auto& b = cfg.bench;
  const auto recs = b.kind == "trotter" ? bench_trotter_step(b.ns, b.trotter) : bench_qoc_iteration(b.ns, b.backends, b.qoc);
  json s{{"command", "bench"}, {"kind", b.kind}, {"records", records_json(recs)}};
  if (!cfg.out.empty()) {
    auto os = open_output(cfg.out);
    write_bench_csv(os, recs);
    write_resolved(cfg);
    s["output"] = cfg.out;
  }
  return s;
}

json run_verify(const RunConfig& cfg, int& code) {
  const VerifyReport r = verify_suite(cfg.verify.ns, cfg.verify.groups);
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"n", c.n},
                      {"group", group_name(c.group)},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  if (!r.pass()) code = kExitNumerical;
  json s{{"command", "verify"}, {"checks", checks.size()}, {"failures", r.failures()}, {"results", checks}};
  if (!cfg.out.empty()) {
    auto os = open_output(cfg.out);
    write_verify_report(os, r);
    write_resolved(cfg);
    s["output"] = cfg.out;
  }
  return s;
}

}  // namespace

void write_pulses_csv(std::ostream& os, const PulseSchedule& s) {
  os << "step,t";
  if (s.channels() == 1) {
    os << ",Bx,By";
  } else {
    for (int c = 1; c <= s.channels(); ++c) os << ",Bx" << c << ",By" << c;
  }
  os << '\n';
  for (int j = 0; j < s.steps(); ++j) {
    os << j << ',' << g17(s.time(j));
    for (int c = 0; c < s.channels(); ++c) os << ',' << g17(s.bx(c, j)) << ',' << g17(s.by(c, j));
    os << '\n';
  }
}

PulseSchedule read_pulses_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line.rfind("step,t,", 0) == 0, "pulses file lacks a step,t header");
  const auto columns = split_list(line).size();
  require(columns >= 4 && columns % 2 == 0, "pulses header must list Bx/By pairs");
  const int channels = static_cast<int>(columns - 2) / 2;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto items = split_list(line);
    require(items.size() == columns, "pulses row " + std::to_string(rows.size()) + " has the wrong column count");
    require(parse_integer(items[0], "step") == static_cast<long long>(rows.size()), "pulses rows must be in step order");
    std::vector<double> v;
    for (std::size_t k = 1; k < items.size(); ++k) v.push_back(parse_double(items[k], "pulse sample"));
    rows.push_back(std::move(v));
  }
  require(!rows.empty(), "pulses file has no samples");
  const double tau = 2.0 * rows[0][0];
  PulseSchedule s(channels, static_cast<int>(rows.size()), tau);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (int c = 0; c < channels; ++c) {
      s.bx(c, static_cast<Eigen::Index>(j)) = rows[j][1 + 2 * static_cast<std::size_t>(c)];
      s.by(c, static_cast<Eigen::Index>(j)) = rows[j][2 + 2 * static_cast<std::size_t>(c)];
    }
  s.validate();
  return s;
}

void write_trace_csv(std::ostream& os, const QocResult& r, bool timing) {
  os << "iter,P,wall_ms\n";
  for (std::size_t k = 0; k < r.trace.size(); ++k)
    os << k << ',' << g17(r.trace[k]) << ',' << g17(timing && k < r.wall_ms.size() ? r.wall_ms[k] : 0.0) << '\n';
}

fs::path resolved_config_path(const RunConfig& cfg) {
  require(!cfg.out.empty(), "no output location configured");
  if (is_directory_command(cfg.command)) return fs::path(cfg.out) / "resolved.cfg";
  return fs::path(cfg.out + ".resolved.cfg");
}

int run_command(const RunConfig& cfg, bool json_out, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  json summary;
  try {
    if (cfg.command == "adjoint")
      summary = run_adjoint(cfg);
    else if (cfg.command == "optimize")
      summary = run_optimize(cfg, code);
    else if (cfg.command == "trotter")
      summary = run_trotter(cfg);
    else if (cfg.command == "analyze")
      summary = run_analyze(cfg);
    else if (cfg.command == "bench")
      summary = run_bench(cfg);
    else if (cfg.command == "verify")
      summary = run_verify(cfg, code);
    else
      throw ValidationError("unknown command '" + cfg.command + "'");
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    code = kExitValidation;
    summary = {{"error", e.what()}};
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    code = kExitNumerical;
    summary = {{"error", e.what()}};
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = kExitValidation;
    summary = {{"error", e.what()}};
  }
  summary["exit_code"] = code;
  if (json_out) {
    out << summary.dump(2) << '\n';
    return code;
  }
  if (summary.contains("results")) {
    char buf[200];
    for (const auto& c : summary["results"]) {
      std::snprintf(buf, sizeof buf, "%s n=%d group=%s %s residual=%.3e\n", c["pass"].get<bool>() ? "PASS" : "FAIL",
                    c["n"].get<int>(), c["group"].get<std::string>().c_str(), c["name"].get<std::string>().c_str(),
                    c["residual"].get<double>());
      out << buf;
    }
    summary.erase("results");
  }
  if (summary.contains("records")) {
    write_bench_csv(out, {});
    for (const auto& r : summary["records"]) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%d\n", r["n"].get<int>(), r["backend"].get<std::string>().c_str(),
                    r["median_ns"].get<double>(), r["mean_ns"].get<double>(), r["min_ns"].get<double>(), r["reps"].get<int>());
      out << buf;
    }
    summary.erase("records");
  }
  print_text(out, summary);
  return code;
}

}  // namespace symqoc
