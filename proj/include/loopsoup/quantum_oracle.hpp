#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/graph.hpp"

namespace loopsoup {

/// Dense operator on the 2^n dimensional spin-1/2 space. Basis state bit x
/// set means site x is down (S3 eigenvalue -1/2).
struct SpinOperator {
  Eigen::MatrixXcd matrix;
  std::string label;

  Eigen::Index dimension() const { return matrix.rows(); }
};

inline constexpr std::size_t default_spin_cap = 12;

namespace detail {

inline std::size_t sites_of(const SpinOperator& op) {
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < op.dimension()) ++n;
  if ((Eigen::Index{1} << n) != op.dimension()) throw std::invalid_argument("SpinOperator: dimension is not a power of two");
  return n;
}

inline void check_axis(int axis) {
  if (axis < 1 || axis > 3) throw std::invalid_argument("spin axis must be 1, 2 or 3");
}

// Matrix element <out| S^a |in> for one site with `bit` the in-state bit.
inline std::complex<double> single_site(int axis, bool bit) {
  using namespace std::complex_literals;
  switch (axis) {
    case 1: return 0.5;
    case 2: return bit ? -0.5i : 0.5i;  // S2|up> = (i/2)|down>, S2|down> = -(i/2)|up>
    default: return bit ? -0.5 : 0.5;
  }
}

}  // namespace detail

/// S^a at site x, identity elsewhere.
inline SpinOperator spin_operator(std::size_t n_sites, std::size_t x, int axis) {
  detail::check_axis(axis);
  if (x >= n_sites) throw std::out_of_range("spin_operator: site out of range");
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  SpinOperator op{Eigen::MatrixXcd::Zero(dim, dim), "S" + std::to_string(axis) + "_" + std::to_string(x)};
  const Eigen::Index mask = Eigen::Index{1} << x;
  for (Eigen::Index s = 0; s < dim; ++s) {
    const bool bit = (s & mask) != 0;
    const Eigen::Index out = axis == 3 ? s : (s ^ mask);
    op.matrix(out, s) += detail::single_site(axis, bit);
  }
  return op;
}

/// S^a_x S^a_y, built directly from bit flips.
inline SpinOperator spin_pair_operator(std::size_t n_sites, std::size_t x, std::size_t y, int axis) {
  detail::check_axis(axis);
  if (x >= n_sites || y >= n_sites || x == y) throw std::invalid_argument("spin_pair_operator: need distinct valid sites");
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  SpinOperator op{Eigen::MatrixXcd::Zero(dim, dim),
                  "S" + std::to_string(axis) + "_" + std::to_string(x) + " S" + std::to_string(axis) + "_" + std::to_string(y)};
  const Eigen::Index mx = Eigen::Index{1} << x;
  const Eigen::Index my = Eigen::Index{1} << y;
  for (Eigen::Index s = 0; s < dim; ++s) {
    const Eigen::Index out = axis == 3 ? s : (s ^ mx ^ my);
    op.matrix(out, s) += detail::single_site(axis, (s & mx) != 0) * detail::single_site(axis, (s & my) != 0);
  }
  return op;
}

/// H = -2 sum_{xy in E} (S1_x S1_y + u S2_x S2_y + S3_x S3_y).
inline SpinOperator build_hamiltonian(const Graph& g, double u, std::size_t cap = default_spin_cap) {
  if (g.size() > cap)
    throw std::length_error("build_hamiltonian: " + std::to_string(g.size()) + " spins exceed the dense cap of " +
                            std::to_string(cap) + "; use Monte Carlo only for this graph");
  if (g.size() == 0) throw std::invalid_argument("build_hamiltonian: empty graph");
  const std::size_t n = g.size();
  const Eigen::Index dim = Eigen::Index{1} << n;
  SpinOperator h{Eigen::MatrixXcd::Zero(dim, dim), "H(u=" + std::to_string(u) + ")"};
  for (const Edge& e : g.edges()) {
    h.matrix += -2.0 * spin_pair_operator(n, e.a, e.b, 1).matrix;
    h.matrix += -2.0 * u * spin_pair_operator(n, e.a, e.b, 2).matrix;
    h.matrix += -2.0 * spin_pair_operator(n, e.a, e.b, 3).matrix;
  }
  return h;
}

inline double hermiticity_defect(const SpinOperator& op) {
  return (op.matrix - op.matrix.adjoint()).cwiseAbs().maxCoeff();
}

inline Eigen::VectorXd spectrum(const SpinOperator& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectrum: diagonalization failed");
  return solver.eigenvalues();
}

namespace detail {

inline double log_sum_exp(const Eigen::VectorXd& x) {
  const double top = x.maxCoeff();
  return top + std::log((x.array() - top).exp().sum());
}

}  // namespace detail

/// Z = Tr exp(-beta H).
inline double partition_function(const SpinOperator& h, double beta) {
  return std::exp(detail::log_sum_exp(-beta * spectrum(h)));
}

/// Gibbs state exp(-beta H)/Z held in the eigenbasis of H.
class ThermalState {
 public:
  ThermalState(const SpinOperator& h, double beta) : n_sites_(detail::sites_of(h)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix);
    if (solver.info() != Eigen::Success) throw std::runtime_error("ThermalState: diagonalization failed");
    const Eigen::VectorXd logw = -beta * solver.eigenvalues();
    log_z_ = detail::log_sum_exp(logw);
    weights_ = (logw.array() - log_z_).exp();
    vectors_ = solver.eigenvectors();
  }

  double log_partition_function() const { return log_z_; }
  std::size_t sites() const { return n_sites_; }

  /// Tr(A rho) = sum_i w_i <v_i|A|v_i>.
  std::complex<double> expectation(const SpinOperator& a) const {
    const Eigen::MatrixXcd rotated = vectors_.adjoint() * a.matrix * vectors_;
    std::complex<double> sum = 0.0;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) sum += weights_(i) * rotated(i, i);
    return sum;
  }

  /// <S^a_x S^a_y>, real for these Hermitian products.
  double correlation(std::size_t x, std::size_t y, int axis) const {
    return expectation(spin_pair_operator(n_sites_, x, y, axis)).real();
  }

 private:
  std::size_t n_sites_;
  double log_z_ = 0.0;
  Eigen::VectorXd weights_;
  Eigen::MatrixXcd vectors_;
};

inline double gibbs_correlation(const SpinOperator& h, double beta, std::size_t x, std::size_t y, int axis) {
  if (x == y) throw std::invalid_argument("gibbs_correlation: need x != y");
  return ThermalState(h, beta).correlation(x, y, axis);
}

/// log Tr exp(-beta H + eta sum_x S3_x).
inline double log_trace_with_field(const SpinOperator& h, double beta, double eta) {
  const std::size_t n = detail::sites_of(h);
  Eigen::MatrixXcd a = -beta * h.matrix;
  for (Eigen::Index s = 0; s < a.rows(); ++s) {
    const int down = __builtin_popcountll(static_cast<unsigned long long>(s));
    a(s, s) += eta * 0.5 * (static_cast<double>(n) - 2.0 * down);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("log_trace_with_field: diagonalization failed");
  return detail::log_sum_exp(solver.eigenvalues());
}

class CurvatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (4/|Lambda|^2) d^2/d eta^2 log Tr exp(-beta H + eta sum S3)|_0 by central
/// differences at eta = 1e-2 and 1e-3 combined by Richardson extrapolation.
inline double susceptibility_curvature(const SpinOperator& h, const Graph& g, double beta) {
  const double f0 = log_trace_with_field(h, beta, 0.0);
  auto second = [&](double step) {
    return (log_trace_with_field(h, beta, step) - 2.0 * f0 + log_trace_with_field(h, beta, -step)) / (step * step);
  };
  const double coarse_step = 1e-2, fine_step = 1e-3;
  const double coarse = second(coarse_step), fine = second(fine_step);
  const double r = (coarse_step * coarse_step) / (fine_step * fine_step);
  const double extrapolated = (r * fine - coarse) / (r - 1.0);
  if (!std::isfinite(extrapolated) || std::abs(coarse - fine) > 1e-2 * std::max(1.0, std::abs(fine)))
    throw CurvatureError("susceptibility_curvature: finite differences disagree (coarse " + std::to_string(coarse) +
                         ", fine " + std::to_string(fine) + ")");
  const double n = static_cast<double>(g.size());
  return 4.0 / (n * n) * extrapolated;
}

/// Loop-side normalization of the quantum partition function:
/// Z~ = exp(-beta |E| / 2) Tr exp(-beta H).
inline double loop_partition_function(const SpinOperator& h, const Graph& g, double beta) {
  return std::exp(-0.5 * beta * static_cast<double>(g.edge_count()) + detail::log_sum_exp(-beta * spectrum(h)));
}

}  // namespace loopsoup
