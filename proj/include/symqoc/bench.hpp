#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "symqoc/qoc.hpp"
#include "symqoc/trotter.hpp"

namespace symqoc {

/// Benchmarked variants produced different numbers; no timing is reported.
class GateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline constexpr int kMinBenchReps = 5;
inline constexpr double kQocGateTol = 1e-8;
inline constexpr double kTrotterGateFidelity = 0.996;

struct TimingStats {
  int reps = 0;
  double min_ns = 0.0;
  double median_ns = 0.0;
  double mean_ns = 0.0;
};

/// Median/mean/min of `reps` timed calls, each divided by `units`.
inline TimingStats time_repeated(const std::function<void()>& fn, int reps, double units = 1.0, bool warmup = true) {
  require(reps >= kMinBenchReps, "benchmarks need at least " + std::to_string(kMinBenchReps) + " repetitions");
  require(units > 0.0, "timing units must be positive");
  if (warmup) fn();
  std::vector<double> ns;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    ns.push_back(std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count() / units);
  }
  std::sort(ns.begin(), ns.end());
  TimingStats t;
  t.reps = reps;
  t.min_ns = ns.front();
  const auto mid = ns.size() / 2;
  t.median_ns = ns.size() % 2 ? ns[mid] : 0.5 * (ns[mid - 1] + ns[mid]);
  double sum = 0.0;
  for (double v : ns) sum += v;
  t.mean_ns = sum / reps;
  return t;
}

struct BenchRecord {
  int n = 0;
  std::string label;
  TimingStats stats;
  int steps = 0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::string note;
};

struct QocWorkload {
  ModelFamily family = ModelFamily::uncoupled;
  double total = 10.0;
  int steps = 100;
  int iterations = 3;
  int reps = kMinBenchReps;
  std::uint64_t seed = 1;

  friend bool operator==(const QocWorkload&, const QocWorkload&) = default;
};

/// Fixed-iteration problem: the target and stall rules never fire.
inline QocProblem bench_problem(const QocWorkload& w, int n, Backend b) {
  QocProblem p;
  p.model = make_model(w.family, n);
  p.grid = {w.total, w.steps};
  p.backend = b;
  p.optimizer.max_iterations = w.iterations;
  p.optimizer.target = 1.0;
  p.optimizer.stall_tolerance = 0.0;
  p.init.seed = w.seed;
  return p;
}

inline double max_schedule_difference(const PulseSchedule& a, const PulseSchedule& b) {
  require(a.bx.rows() == b.bx.rows() && a.bx.cols() == b.bx.cols(), "schedules differ in shape");
  return std::max((a.bx - b.bx).cwiseAbs().maxCoeff(), (a.by - b.by).cwiseAbs().maxCoeff());
}

/// Per-iteration optimizer cost for each (n, backend). All backends must
/// produce the same trace and pulses before any timing is kept.
inline std::vector<BenchRecord> bench_qoc_iteration(const std::vector<int>& ns, const std::vector<Backend>& backends,
                                                    const QocWorkload& w) {
  require(!backends.empty(), "no backends to benchmark");
  require(w.iterations >= 1, "benchmark needs at least one iteration");
  std::vector<BenchRecord> out;
  for (int n : ns) {
    std::optional<QocResult> ref;
    for (Backend b : backends) {
      const QocProblem p = bench_problem(w, n, b);
      p.validate();
      const BackendSpace space(p.model, b);
      const PulseSchedule start = initial_schedule(p);
      const QocResult r = optimize(p, space, start);
      if (!ref) {
        ref = r;
      } else {
        bool same = r.trace.size() == ref->trace.size();
        for (std::size_t k = 0; same && k < r.trace.size(); ++k) same = std::abs(r.trace[k] - ref->trace[k]) <= kQocGateTol;
        same = same && max_schedule_difference(r.schedule, ref->schedule) <= kQocGateTol;
        if (!same)
          throw GateError("correctness gate: backend " + std::string(backend_name(b)) + " disagrees with " +
                          backend_name(ref->backend) + " at n=" + std::to_string(n));
      }
      const auto stats = time_repeated([&] { optimize(p, space, start); }, w.reps, std::max(1, r.iterations()), false);
      out.push_back({n, std::string("qoc:") + backend_name(b), stats, w.steps, p.grid.tau(), w.seed,
                     std::string(model_family_name(w.family)) + " per-iteration threads=1"});
    }
  }
  return out;
}

struct TrotterWorkload {
  ModelFamily family = ModelFamily::nearest;
  int steps = 20;
  double tau = 0.05;
  int reps = kMinBenchReps;

  friend bool operator==(const TrotterWorkload&, const TrotterWorkload&) = default;
};

/// exp(-i tau H_j) K with H_j assembled on the full space.
inline void exact_full_step(const ModelOperators& ops, const PulseSchedule& s, int j, DenseMatrix& k) {
  DenseMatrix h = ops.h0.to_dense();
  for (std::size_t c = 0; c < ops.hx.size(); ++c) {
    h += s.bx(static_cast<Eigen::Index>(c), j) * ops.hx[c].to_dense();
    h += s.by(static_cast<Eigen::Index>(c), j) * ops.hy[c].to_dense();
  }
  k = HermitianExponential(h, s.tau).unitary() * k;
}

/// Per-step cost of the full exponential and the per-qubit Trotter plan.
/// trotter-parallel-approx is the serial time divided by n.
inline std::vector<BenchRecord> bench_trotter_step(const std::vector<int>& ns, const TrotterWorkload& w) {
  require(w.steps >= 1, "benchmark needs at least one step");
  std::vector<BenchRecord> out;
  for (int n : ns) {
    ModelConfig m = make_model(w.family, n);
    m.control = ControlMode::per_qubit;
    const auto plan = plan_per_qubit_coupled(m, w.tau);
    const auto ops = realize_model(m);
    const PulseSchedule s = benchmark_controls(n, m.bz, w.steps, w.tau);
    const auto d = static_cast<Eigen::Index>(hilbert_dim(n));
    DenseMatrix k_exact, k_lts;
    auto run_exact = [&] {
      k_exact = DenseMatrix::Identity(d, d);
      for (int j = 0; j < s.steps(); ++j) exact_full_step(ops, s, j, k_exact);
    };
    auto run_lts = [&] {
      k_lts = DenseMatrix::Identity(d, d);
      for (int j = 0; j < s.steps(); ++j) apply_trotter_step(plan, s, j, k_lts);
    };
    run_exact();
    run_lts();
    const double f = unitary_fidelity(k_lts, k_exact);
    if (!(f >= kTrotterGateFidelity))
      throw GateError("correctness gate: Trotter fidelity " + std::to_string(f) + " below " +
                      std::to_string(kTrotterGateFidelity) + " at n=" + std::to_string(n));
    const std::string note = std::string(model_family_name(w.family)) + " per-step threads=1";
    const auto exact = time_repeated(run_exact, w.reps, w.steps, false);
    const auto serial = time_repeated(run_lts, w.reps, w.steps, false);
    TimingStats approx = serial;
    approx.min_ns /= n;
    approx.median_ns /= n;
    approx.mean_ns /= n;
    out.push_back({n, "exact", exact, w.steps, w.tau, 0, note});
    out.push_back({n, "trotter-serial", serial, w.steps, w.tau, 0, note});
    out.push_back({n, "trotter-parallel-approx", approx, w.steps, w.tau, 0, note + " approximation=serial/n"});
  }
  return out;
}

inline const BenchRecord& find_record(const std::vector<BenchRecord>& recs, int n, const std::string& label) {
  for (const auto& r : recs)
    if (r.n == n && r.label == label) return r;
  throw ValidationError("no benchmark record for n=" + std::to_string(n) + " " + label);
}

/// median(slow) / median(fast)
inline double speedup(const std::vector<BenchRecord>& recs, int n, const std::string& slow, const std::string& fast) {
  return find_record(recs, n, slow).stats.median_ns / find_record(recs, n, fast).stats.median_ns;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& recs) {
  os << "n,backend,median_ns,mean_ns,min_ns,reps\n";
  char buf[160];
  for (const auto& r : recs) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g,%d\n", r.n, r.label.c_str(), r.stats.median_ns,
                  r.stats.mean_ns, r.stats.min_ns, r.stats.reps);
    os << buf;
  }
}

}  // namespace symqoc
