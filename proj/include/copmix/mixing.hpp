#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/errors.hpp"
#include "copmix/format.hpp"
#include "copmix/grid.hpp"

namespace copmix {

// beta_n of the checkerboard chain. The sup over Borel sets is attained by
// the positive-part set, so the grid value is exact:
//   (1/m) sum_ij (P_ij - 1/m)^+
inline double beta_coeff(const TransitionMatrix& p) {
  const int m = p.resolution();
  const double inv_m = 1.0 / m;
  return inv_m * (p.entries().array() - inv_m).max(0.0).sum();
}

// phi_n: the ess sup over starting states becomes a max over rows.
inline double phi_coeff(const TransitionMatrix& p) {
  const int m = p.resolution();
  const double inv_m = 1.0 / m;
  return (p.entries().array() - inv_m).max(0.0).rowwise().sum().maxCoeff();
}

namespace detail {

inline Eigen::MatrixXd centered(const TransitionMatrix& p) {
  const int m = p.resolution();
  return p.entries() - Eigen::MatrixXd::Constant(m, m, 1.0 / m);
}

// Largest singular value of the centered kernel by alternating applications
// of B and B^T; the constant direction is in the null space, so no explicit
// projection is needed for doubly stochastic input.
inline double rho_power_iteration(const Eigen::MatrixXd& b, double rel_tol = 1e-10,
                                  long budget = 100000) {
  const int m = static_cast<int>(b.rows());
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = (i % 2 == 0) ? 1.0 : -1.0;
  v(0) += 0.5;  // break symmetry for even m
  v.normalize();
  double sigma = 0.0;
  for (long it = 0; it < budget; ++it) {
    Eigen::VectorXd w = b * v;
    Eigen::VectorXd z = b.transpose() * w;
    const double norm = z.norm();
    if (norm == 0.0) return 0.0;
    const double sigma_new = std::sqrt(w.squaredNorm() / v.squaredNorm());
    z /= norm;
    const double delta = std::abs(sigma_new - sigma);
    v = z;
    sigma = sigma_new;
    if (it > 0 && delta <= rel_tol * std::max(sigma, 1e-300)) return sigma;
  }
  throw NoConvergence("rho power iteration exhausted its budget", sigma);
}

}  // namespace detail

// rho_1: operator norm of the kernel on mean-zero square-integrable
// functions = the second-largest singular value of P, computed as the top
// singular value of the centered matrix (the two coincide for doubly
// stochastic P). Full decomposition up to m=512, power iteration beyond.
inline double rho_coeff(const TransitionMatrix& p) {
  const Eigen::MatrixXd b = detail::centered(p);
  if (p.resolution() <= 512) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
    return svd.singularValues()(0);
  }
  return detail::rho_power_iteration(b);
}

// Least-squares geometric rate of a decaying sequence: slope of log(value)
// against lag, exponentiated; undefined when fewer than two values exceed
// 1e-13.
inline std::optional<double> geometric_rate(std::span<const double> values,
                                            std::span<const double> lags) {
  if (values.size() != lags.size() || values.size() < 2)
    throw std::invalid_argument("geometric_rate needs equal-length arrays of length >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] <= 1e-13) continue;
    const double x = lags[k];
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  const double slope = (n * sxy - sx * sy) / denom;
  return std::min(1.0, std::exp(slope));
}

// Per-lag mixing coefficients of the chain induced by a copula, with fitted
// geometric rates. Powers are taken sequentially so consecutive lags are
// exact products.
struct MixingProfile {
  std::string spec_id;
  int m = 0;
  std::vector<double> beta;  // lag 1..n_max
  std::vector<double> rho;
  std::vector<double> phi;
  double rate_beta = 0.0;  // 0 when undefined (coefficients identically ~0)
  double rate_rho = 0.0;
  double rate_phi = 0.0;
  bool beta_nondecreasing = false;  // flags a profile with no net decay
  bool rho_nondecreasing = false;
  bool phi_nondecreasing = false;
};

inline MixingProfile mixing_profile_from(const TransitionMatrix& p, int n_max,
                                         const std::string& spec_id) {
  if (n_max < 1 || n_max > 64) throw OutOfRangeParameter("n_max", "[1,64]", n_max);
  MixingProfile out;
  out.spec_id = spec_id;
  out.m = p.resolution();
  TransitionMatrix pn = p;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) pn = fold(pn, p);
    out.beta.push_back(beta_coeff(pn));
    out.rho.push_back(rho_coeff(pn));
    out.phi.push_back(phi_coeff(pn));
  }
  std::vector<double> lags(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) lags[n - 1] = n;
  out.rate_beta = geometric_rate(out.beta, lags).value_or(0.0);
  out.rate_rho = geometric_rate(out.rho, lags).value_or(0.0);
  out.rate_phi = geometric_rate(out.phi, lags).value_or(0.0);
  const auto nondecreasing = [](const std::vector<double>& v) {
    return v.size() >= 2 && v.front() > 1e-13 && !(v.back() < v.front());
  };
  out.beta_nondecreasing = nondecreasing(out.beta);
  out.rho_nondecreasing = nondecreasing(out.rho);
  out.phi_nondecreasing = nondecreasing(out.phi);
  return out;
}

inline MixingProfile mixing_profile(const CopulaSpec& spec, int m, int n_max) {
  return mixing_profile_from(discretize(spec, m), n_max, spec.id());
}

// Violations of the chain inequalities a profile must satisfy; empty means
// the profile is internally consistent.
inline std::vector<std::string> profile_violations(const MixingProfile& p) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < p.beta.size(); ++k) {
    const int lag = static_cast<int>(k) + 1;
    if (!(p.beta[k] <= p.phi[k] + 1e-12))
      out.push_back("beta[" + std::to_string(lag) + "] > phi[" + std::to_string(lag) + "]");
    if (!(p.rho[k] <= 2.0 * std::sqrt(p.phi[k]) + 1e-9))
      out.push_back("rho[" + std::to_string(lag) + "] > 2 sqrt(phi)");
    if (!(p.rho[k] <= std::pow(p.rho[0], lag) + 1e-9))
      out.push_back("rho[" + std::to_string(lag) + "] > rho1^" + std::to_string(lag));
    if (!(p.beta[k] >= -1e-15 && p.beta[k] <= 1.0 + 1e-12) ||
        !(p.rho[k] >= -1e-15 && p.rho[k] <= 1.0 + 1e-12) ||
        !(p.phi[k] >= -1e-15 && p.phi[k] <= 1.0 + 1e-12))
      out.push_back("coefficient outside [0,1] at lag " + std::to_string(lag));
  }
  return out;
}

// Profile CSV: "lag,beta,rho,phi,rho1_pow", 15 significant digits.
inline void write_profile_csv(std::ostream& os, const MixingProfile& p) {
  os << "lag,beta,rho,phi,rho1_pow\n";
  const double rho1 = p.rho.empty() ? 0.0 : p.rho.front();
  for (std::size_t k = 0; k < p.beta.size(); ++k) {
    const int lag = static_cast<int>(k) + 1;
    os << lag << ',' << detail::fmt_sig(p.beta[k], 15) << ',' << detail::fmt_sig(p.rho[k], 15)
       << ',' << detail::fmt_sig(p.phi[k], 15) << ','
       << detail::fmt_sig(std::pow(rho1, lag), 15) << "\n";
  }
}

// Doeblin minorization report: a grid estimate of the density floor c of the
// absolutely continuous part, the paper's epsilon = c/(1+c), and the implied
// phi_1 bound 1 - epsilon, checked against the computed grid phi_1.
struct DoeblinReport {
  std::string spec_id;
  int m = 0;
  double density_floor = 0.0;  // c
  double epsilon = 0.0;        // c/(1+c)
  double phi_bound = 1.0;      // 1 - epsilon
  double grid_phi1 = 0.0;
  bool applicable = false;
};

inline DoeblinReport doeblin_report_from(const CopulaSpec& spec, const TransitionMatrix& p) {
  const int m = p.resolution();
  DoeblinReport out;
  out.spec_id = spec.id();
  out.m = m;
  // Density floor over the (2m)^2 cell-midpoint grid; density() already
  // excludes singular curves by returning the absolutely continuous part.
  const int g = 2 * m;
  double floor_est = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g; ++i) {
    const double u = (2.0 * i + 1.0) / (2.0 * g);
    for (int j = 0; j < g; ++j) {
      const double v = (2.0 * j + 1.0) / (2.0 * g);
      floor_est = std::min(floor_est, density(spec, UnitSquarePoint(u, v)).value);
    }
  }
  out.density_floor = floor_est;
  out.epsilon = floor_est / (1.0 + floor_est);
  out.phi_bound = 1.0 - out.epsilon;
  out.grid_phi1 = phi_coeff(p);
  out.applicable = floor_est >= 1e-9;
  return out;
}

inline DoeblinReport doeblin_report(const CopulaSpec& spec, int m) {
  if (m < 2 || m > 4096) throw OutOfRangeParameter("m", "[2,4096]", m);
  return doeblin_report_from(spec, discretize(spec, m));
}

}  // namespace copmix
