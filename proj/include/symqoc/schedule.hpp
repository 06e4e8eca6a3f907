#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "symqoc/error.hpp"

namespace symqoc {

/// [0, T] split into N equal steps; controls are sampled at midpoints.
struct TimeGrid {
  double total = 180.0;
  int steps = 3600;

  double tau() const { return steps > 0 ? total / steps : 0.0; }
  double midpoint(int j) const { return (j + 0.5) * tau(); }

  void validate() const {
    require(std::isfinite(total) && total > 0.0, "grid duration T must be positive");
    require(steps >= 0, "step count N must be non-negative");
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Piecewise-constant controls. Row c of bx/by is control channel c
/// (one row for global drive, n rows for per-qubit drive).
struct PulseSchedule {
  double tau = 0.05;
  Eigen::MatrixXd bx;
  Eigen::MatrixXd by;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::optional<double> bound;

  PulseSchedule() = default;
  PulseSchedule(int channels, int steps, double step_tau)
      : tau(step_tau), bx(Eigen::MatrixXd::Zero(channels, steps)), by(Eigen::MatrixXd::Zero(channels, steps)) {}

  int steps() const { return static_cast<int>(bx.cols()); }
  int channels() const { return static_cast<int>(bx.rows()); }
  double time(int j) const { return (j + 0.5) * tau; }

  void validate() const {
    require(bx.rows() == by.rows() && bx.cols() == by.cols(), "B_x and B_y sample arrays differ in shape");
    require(std::isfinite(tau) && (tau > 0.0 || steps() == 0), "step duration must be positive");
    require(bx.allFinite() && by.allFinite(), "pulse samples must be finite");
    if (bound) {
      require(*bound > 0.0, "amplitude bound must be positive");
      require(bx.cwiseAbs().maxCoeff() <= *bound && by.cwiseAbs().maxCoeff() <= *bound,
              "pulse samples exceed the amplitude bound");
    }
  }

  void validate_against(const TimeGrid& grid) const {
    validate();
    require(steps() == grid.steps, "schedule has " + std::to_string(steps()) + " steps, grid has " +
                                       std::to_string(grid.steps));
    require(steps() == 0 || std::abs(tau - grid.tau()) <= 1e-12 * std::max(1.0, grid.tau()),
            "schedule step duration does not match grid");
  }

  void clip_to_bound() {
    if (!bound) return;
    bx = bx.cwiseMax(-*bound).cwiseMin(*bound);
    by = by.cwiseMax(-*bound).cwiseMin(*bound);
  }
};

}  // namespace symqoc
