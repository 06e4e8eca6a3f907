#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "symqoc/propagate.hpp"

namespace symqoc {

/// |<psi_f|psi_N>|^2
inline double objective(const DenseVector& psi_n, const DenseVector& psi_f) {
  require(psi_n.size() == psi_f.size(), "objective: state dimension mismatch");
  return std::norm(psi_f.dot(psi_n));
}

/// Fock index from `all-up`, `all-down` or a u/d pattern of length n.
inline std::uint32_t parse_state_label(const std::string& label, int n) {
  if (label == "all-up") return 0;
  if (label == "all-down") return static_cast<std::uint32_t>(hilbert_dim(n) - 1);
  require(static_cast<int>(label.size()) == n, "state label '" + label + "' must be all-up, all-down or n u/d letters");
  return fock_index(label);
}

enum class StepPolicy { fixed, adaptive };

inline const char* step_policy_name(StepPolicy p) { return p == StepPolicy::fixed ? "fixed" : "adaptive"; }

inline StepPolicy parse_step_policy(const std::string& s) {
  if (s == "fixed") return StepPolicy::fixed;
  if (s == "adaptive") return StepPolicy::adaptive;
  throw ValidationError("unknown step policy '" + s + "' (expected fixed or adaptive)");
}

struct OptimizerSettings {
  int max_iterations = 2000;
  double target = 0.999;
  double stall_tolerance = 1e-9;
  int stall_window = 5;
  double initial_step = 1.0;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
  /// fixed: every line search starts at initial_step; adaptive: at twice the
  /// last accepted step.
  StepPolicy step_policy = StepPolicy::fixed;
  double momentum = 0.0;

  void validate() const {
    require(max_iterations >= 0, "max_iterations must be non-negative");
    require(target > 0.0 && target <= 1.0, "target probability must lie in (0, 1]");
    require(stall_tolerance >= 0.0 && stall_window >= 1, "invalid stall criterion");
    require(initial_step > 0.0, "initial step must be positive");
    require(armijo > 0.0 && armijo < 1.0, "Armijo constant must lie in (0, 1)");
    require(shrink > 0.0 && shrink < 1.0, "shrink factor must lie in (0, 1)");
    require(max_backtracks >= 1, "max_backtracks must be positive");
    require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  }

  friend bool operator==(const OptimizerSettings&, const OptimizerSettings&) = default;
};

struct InitSettings {
  double amplitude = 0.05;
  std::optional<double> frequency;  ///< defaults to B_z
  bool random = false;
  std::uint64_t seed = 1;

  friend bool operator==(const InitSettings&, const InitSettings&) = default;
};

struct QocProblem {
  ModelConfig model;
  TimeGrid grid;
  std::string initial_state = "all-up";
  std::string target_state = "all-down";
  Backend backend = Backend::first_block_d;
  OptimizerSettings optimizer;
  InitSettings init;
  std::optional<double> bound;

  void validate() const {
    model.validate();
    grid.validate();
    optimizer.validate();
    require(std::isfinite(init.amplitude) && init.amplitude >= 0.0, "initial amplitude must be non-negative");
    parse_state_label(initial_state, model.n);
    parse_state_label(target_state, model.n);
  }

  friend bool operator==(const QocProblem&, const QocProblem&) = default;
};

struct QocResult {
  PulseSchedule schedule;
  std::vector<double> trace;    ///< P at iteration 0..k
  std::vector<double> wall_ms;  ///< per iteration, aligned with trace
  Backend backend = Backend::full;
  std::string stop_reason;

  int iterations() const { return static_cast<int>(trace.size()) - 1; }
  double final_objective() const { return trace.empty() ? 0.0 : trace.back(); }

  /// First iteration index with P >= level, or -1.
  int iterations_to_reach(double level) const {
    for (std::size_t k = 0; k < trace.size(); ++k)
      if (trace[k] >= level) return static_cast<int>(k);
    return -1;
  }
};

/// Resonant co-rotating drive (or seeded white noise) on every channel.
inline PulseSchedule initial_schedule(const QocProblem& p) {
  const int channels = p.model.control == ControlMode::global ? 1 : p.model.n;
  PulseSchedule s(channels, p.grid.steps, p.grid.tau());
  s.seed = p.init.seed;
  s.bound = p.bound;
  const double a = p.init.amplitude;
  if (p.init.random) {
    std::mt19937_64 rng(p.init.seed);
    std::uniform_real_distribution<double> u(-a, a);
    for (int c = 0; c < channels; ++c)
      for (int j = 0; j < p.grid.steps; ++j) {
        s.bx(c, j) = u(rng);
        s.by(c, j) = u(rng);
      }
  } else {
    const double w = p.init.frequency.value_or(p.model.bz);
    for (int j = 0; j < p.grid.steps; ++j) {
      const double t = p.grid.midpoint(j);
      s.bx.col(j).setConstant(a * std::cos(w * t));
      s.by.col(j).setConstant(a * std::sin(w * t));
    }
  }
  s.clip_to_bound();
  return s;
}

/// Forward sweep; keeps the states (and the step eigenpairs when they fit
/// the cache budget) for a later backward sweep.
class ForwardPass {
 public:
  static constexpr double kCacheBytes = 256.0 * 1024 * 1024;

  ForwardPass(const BackendSpace& space, const DenseVector& psi0, const DenseVector& psi_f, const PulseSchedule& s,
              bool keep)
      : space_(&space), schedule_(s), psi_f_(psi_f) {
    s.validate();
    require(psi0.size() == space.dim() && psi_f.size() == space.dim(), "state dimension does not match backend");
    const double d = static_cast<double>(space.dim());
    cache_ = keep && static_cast<double>(s.steps()) * d * d * 16.0 <= kCacheBytes;
    if (keep) states_.reserve(static_cast<std::size_t>(s.steps()) + 1);
    DenseVector psi = psi0;
    if (keep) states_.push_back(psi);
    for (int j = 0; j < s.steps(); ++j) {
      HermitianExponential u = space.step_exponential(s, j);
      psi = u.apply(psi);
      check_norm(psi, j);
      if (keep) states_.push_back(psi);
      if (cache_) exps_.push_back(std::move(u));
    }
    final_ = psi;
    overlap_ = psi_f.dot(psi);
    value_ = std::norm(overlap_);
    if (!std::isfinite(value_)) throw NumericalError("objective is not finite");
  }

  double value() const { return value_; }
  const DenseVector& final_state() const { return final_; }
  const std::vector<DenseVector>& states() const { return states_; }

  /// dP/dBx, dP/dBy per channel and step, via backward costates.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient() const {
    require(!states_.empty(), "gradient needs the stored forward trajectory");
    const PulseSchedule& s = schedule_;
    Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(s.channels(), s.steps());
    Eigen::MatrixXd gy = Eigen::MatrixXd::Zero(s.channels(), s.steps());
    DenseVector chi = psi_f_;
    const cplx weight = 2.0 * std::conj(overlap_);
    for (int j = s.steps() - 1; j >= 0; --j) {
      std::optional<HermitianExponential> local;
      const HermitianExponential& u =
          cache_ ? exps_[static_cast<std::size_t>(j)] : local.emplace(space_->step_exponential(s, j));
      const DenseMatrix g = u.overlap_kernel(chi, states_[static_cast<std::size_t>(j)]);
      for (std::size_t c = 0; c < space_->channels(); ++c) {
        const auto r = static_cast<Eigen::Index>(c);
        const cplx dx = cplx(0.0, -s.tau) * trace_product(space_->hx(c), g);
        const cplx dy = cplx(0.0, -s.tau) * trace_product(space_->hy(c), g);
        gx(r, j) = (weight * dx).real();
        gy(r, j) = (weight * dy).real();
      }
      chi = u.apply_adjoint(chi);
    }
    return {gx, gy};
  }

 private:
  const BackendSpace* space_;
  PulseSchedule schedule_;
  DenseVector psi_f_;
  bool cache_ = false;
  std::vector<DenseVector> states_;
  std::vector<HermitianExponential> exps_;
  DenseVector final_;
  cplx overlap_ = 0.0;
  double value_ = 0.0;
};

struct Gradient {
  double objective = 0.0;
  Eigen::MatrixXd bx;
  Eigen::MatrixXd by;
};

inline Gradient gradient(const BackendSpace& space, const DenseVector& psi0, const DenseVector& psi_f,
                         const PulseSchedule& s) {
  ForwardPass f(space, psi0, psi_f, s, true);
  auto [gx, gy] = f.gradient();
  return {f.value(), std::move(gx), std::move(gy)};
}

/// Initial and target states of a problem in backend coordinates.
inline std::pair<DenseVector, DenseVector> boundary_states(const QocProblem& p, const BackendSpace& space) {
  return {space.fock_state(parse_state_label(p.initial_state, p.model.n)),
          space.fock_state(parse_state_label(p.target_state, p.model.n))};
}

/// Gradient ascent with Armijo backtracking.
inline QocResult optimize(const QocProblem& p, const BackendSpace& space, PulseSchedule schedule) {
  p.validate();
  schedule.validate_against(p.grid);
  const auto& opt = p.optimizer;
  const auto [psi0, psi_f] = boundary_states(p, space);
  using clock = std::chrono::steady_clock;

  QocResult r;
  r.backend = space.backend();
  auto t0 = clock::now();
  auto current = std::make_unique<ForwardPass>(space, psi0, psi_f, schedule, true);
  r.trace.push_back(current->value());
  r.wall_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());

  double step = opt.initial_step;
  Eigen::MatrixXd vx = Eigen::MatrixXd::Zero(schedule.channels(), schedule.steps());
  Eigen::MatrixXd vy = vx;
  r.stop_reason = "max-iterations";
  for (int it = 1; it <= opt.max_iterations; ++it) {
    if (r.trace.back() >= opt.target) {
      r.stop_reason = "target";
      break;
    }
    const int k = static_cast<int>(r.trace.size()) - 1;
    if (k >= opt.stall_window &&
        std::abs(r.trace.back() - r.trace[static_cast<std::size_t>(k - opt.stall_window)]) < opt.stall_tolerance) {
      r.stop_reason = "stalled";
      break;
    }
    t0 = clock::now();
    auto [gx, gy] = current->gradient();
    Eigen::MatrixXd dx = gx, dy = gy;
    if (opt.momentum > 0.0) {
      vx = opt.momentum * vx + gx;
      vy = opt.momentum * vy + gy;
      if ((vx.cwiseProduct(gx).sum() + vy.cwiseProduct(gy).sum()) > 0.0) {
        dx = vx;
        dy = vy;
      }
    }
    const double slope = dx.cwiseProduct(gx).sum() + dy.cwiseProduct(gy).sum();
    if (!(slope > 0.0)) {
      r.stop_reason = "zero-gradient";
      break;
    }
    double alpha = opt.step_policy == StepPolicy::fixed ? opt.initial_step : step;
    bool accepted = false;
    for (int b = 0; b < opt.max_backtracks; ++b, alpha *= opt.shrink) {
      PulseSchedule trial = schedule;
      trial.bx += alpha * dx;
      trial.by += alpha * dy;
      trial.clip_to_bound();
      auto f = std::make_unique<ForwardPass>(space, psi0, psi_f, trial, true);
      if (f->value() >= r.trace.back() + opt.armijo * alpha * slope) {
        schedule = std::move(trial);
        current = std::move(f);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.stop_reason = "line-search";
      break;
    }
    step = 2.0 * alpha;
    schedule.iterations = it;
    r.trace.push_back(current->value());
    r.wall_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
  }
  if (r.stop_reason == "max-iterations" && r.trace.back() >= opt.target) r.stop_reason = "target";
  r.schedule = std::move(schedule);
  return r;
}

inline QocResult optimize(const QocProblem& p) {
  p.validate();
  const BackendSpace space(p.model, p.backend);
  return optimize(p, space, initial_schedule(p));
}

}  // namespace symqoc
