#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "symqoc/pauli.hpp"
#include "symqoc/symmetry.hpp"

namespace symqoc {

enum class ControlMode { global, per_qubit };

inline const char* control_mode_name(ControlMode m) { return m == ControlMode::global ? "global" : "perqubit"; }

inline ControlMode parse_control_mode(const std::string& s) {
  if (s == "global") return ControlMode::global;
  if (s == "perqubit" || s == "per-qubit" || s == "per_qubit") return ControlMode::per_qubit;
  throw ValidationError("unknown control mode '" + s + "' (expected global or perqubit)");
}

inline constexpr double kDefaultBz = 1.0;
inline constexpr double kDefaultNearestCoupling = 0.2;

/// Ising ring: field B_z, ring couplings c_k at offset k = 1..couplings.size().
struct ModelConfig {
  int n = 4;
  double bz = kDefaultBz;
  std::vector<double> couplings;
  ControlMode control = ControlMode::global;

  int max_offset() const { return n / 2; }

  void validate() const {
    check_qubit_count(n);
    require(std::isfinite(bz), "B_z must be finite");
    require(static_cast<int>(couplings.size()) <= max_offset(),
            std::to_string(couplings.size()) + " coupling offsets given, at most floor(n/2) = " +
                std::to_string(max_offset()) + " allowed");
    for (double c : couplings) require(std::isfinite(c), "coupling coefficients must be finite");
  }

  bool coupled() const {
    for (double c : couplings)
      if (c != 0.0) return true;
    return false;
  }

  /// Largest qubit-permutation group the static and global-control terms respect.
  GroupKind symmetry() const { return coupled() ? GroupKind::dihedral : GroupKind::symmetric; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline ModelConfig uncoupled_model(int n, double bz = kDefaultBz) { return {n, bz, {}, ControlMode::global}; }

inline ModelConfig nearest_neighbor_model(int n, double bz = kDefaultBz, double c = kDefaultNearestCoupling) {
  return {n, bz, {c}, ControlMode::global};
}

/// Default full-coupling schedule c_k = 0.2 / (2k - 1), k = 1..floor(n/2).
inline std::vector<double> default_full_coupling(int n) {
  std::vector<double> c;
  for (int k = 1; k <= n / 2; ++k) c.push_back(kDefaultNearestCoupling / (2 * k - 1));
  return c;
}

inline ModelConfig full_coupling_model(int n, double bz = kDefaultBz) {
  return {n, bz, default_full_coupling(n), ControlMode::global};
}

enum class ModelFamily { uncoupled, nearest, full };

inline const char* model_family_name(ModelFamily f) {
  return f == ModelFamily::uncoupled ? "uncoupled" : (f == ModelFamily::nearest ? "nearest" : "full");
}

inline ModelFamily parse_model_family(const std::string& s) {
  if (s == "uncoupled") return ModelFamily::uncoupled;
  if (s == "nearest" || s == "nn") return ModelFamily::nearest;
  if (s == "full") return ModelFamily::full;
  throw ValidationError("unknown model family '" + s + "' (expected uncoupled, nearest or full)");
}

inline ModelConfig make_model(ModelFamily f, int n, double bz = kDefaultBz) {
  switch (f) {
    case ModelFamily::uncoupled: return uncoupled_model(n, bz);
    case ModelFamily::nearest: return nearest_neighbor_model(n, bz);
    default: return full_coupling_model(n, bz);
  }
}

/// coefficient * sum_i sigma_axis^(i)
inline PauliTermSum field_sum(int n, Axis axis, double coefficient) {
  PauliTermSum s(n);
  for (int i = 1; i <= n; ++i) s.add(PauliString::single(n, i, axis, coefficient));
  return s;
}

/// sum_k (c_k / 4) sum_{i=1..n} Z_i Z_{i+k}; every i is kept, so k = n/2
/// visits each pair twice.
inline PauliTermSum coupling_sum(int n, const std::vector<double>& couplings) {
  PauliTermSum s(n);
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    if (couplings[k] == 0.0) continue;
    for (int i = 1; i <= n; ++i) s.add(pair_zz(n, i, static_cast<int>(k) + 1, couplings[k] / 4.0));
  }
  return s;
}

inline PauliTermSum static_hamiltonian(const ModelConfig& cfg) {
  cfg.validate();
  PauliTermSum h = field_sum(cfg.n, Axis::z, cfg.bz / 2.0);
  h.append(coupling_sum(cfg.n, cfg.couplings));
  return h;
}

/// Control generators: x[c], y[c] multiply B_x, B_y of channel c.
struct ControlTerms {
  std::vector<PauliTermSum> x;
  std::vector<PauliTermSum> y;

  std::size_t channels() const { return x.size(); }
};

inline ControlTerms control_hamiltonian_terms(const ModelConfig& cfg) {
  cfg.validate();
  ControlTerms t;
  if (cfg.control == ControlMode::global) {
    t.x.push_back(field_sum(cfg.n, Axis::x, 0.5));
    t.y.push_back(field_sum(cfg.n, Axis::y, 0.5));
    return t;
  }
  for (int i = 1; i <= cfg.n; ++i) {
    t.x.emplace_back(cfg.n, std::vector<PauliString>{PauliString::single(cfg.n, i, Axis::x, 0.5)});
    t.y.emplace_back(cfg.n, std::vector<PauliString>{PauliString::single(cfg.n, i, Axis::y, 0.5)});
  }
  return t;
}

/// Realized model operators on the full 2^n space.
struct ModelOperators {
  OperatorMatrix h0;
  std::vector<OperatorMatrix> hx;
  std::vector<OperatorMatrix> hy;
};

inline ModelOperators realize_model(const ModelConfig& cfg) {
  const auto terms = control_hamiltonian_terms(cfg);
  ModelOperators ops{realize(static_hamiltonian(cfg)), {}, {}};
  for (std::size_t c = 0; c < terms.channels(); ++c) {
    ops.hx.push_back(realize(terms.x[c]));
    ops.hy.push_back(realize(terms.y[c]));
  }
  return ops;
}

}  // namespace symqoc
