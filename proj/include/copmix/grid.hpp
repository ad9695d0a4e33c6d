#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/errors.hpp"
#include "copmix/format.hpp"
#include "copmix/quadrature.hpp"

namespace copmix {

// m x m checkerboard transition kernel: entry (i,j) is m times the copula
// mass of cell ((i-1)/m, i/m] x ((j-1)/m, j/m], i.e. the transition
// probability between cells of the coarse-grained chain. Doubly stochastic
// for every copula (uniform invariant marginals); matrices built from
// empirical counts are only row-stochastic and say so in their provenance.
class TransitionMatrix {
public:
  TransitionMatrix(int m, Eigen::MatrixXd entries, std::string spec_id, std::string method)
      : m_(m), entries_(std::move(entries)), spec_id_(std::move(spec_id)),
        method_(std::move(method)) {
    if (m_ < 1 || entries_.rows() != m_ || entries_.cols() != m_)
      throw std::invalid_argument("transition matrix shape does not match resolution");
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        double& e = entries_(i, j);
        if (e < 0.0) {
          if (e < -1e-12) throw NumericalFailure("negative transition mass", -e);
          e = 0.0;  // rounding residue of an exact zero
        }
      }
  }

  int resolution() const noexcept { return m_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  const std::string& spec_id() const noexcept { return spec_id_; }
  const std::string& method() const noexcept { return method_; }
  std::string provenance() const { return spec_id_ + " [" + method_ + "]"; }

  double max_row_sum_error() const {
    return (entries_.rowwise().sum().array() - 1.0).abs().maxCoeff();
  }
  double max_col_sum_error() const {
    return (entries_.colwise().sum().array() - 1.0).abs().maxCoeff();
  }
  bool is_doubly_stochastic(double tol = 1e-12) const {
    return max_row_sum_error() <= tol && max_col_sum_error() <= tol;
  }

private:
  int m_;
  Eigen::MatrixXd entries_;
  std::string spec_id_;
  std::string method_;
};

namespace detail {

// CDF values on the (m+1)x(m+1) node grid, with exact boundary rows so that
// second differences telescope to exact uniform marginals.
inline Eigen::MatrixXd node_cdf_grid(const CopulaSpec& spec, int m) {
  Eigen::MatrixXd nodes(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    nodes(0, i) = 0.0;
    nodes(i, 0) = 0.0;
    nodes(m, i) = static_cast<double>(i) / m;
    nodes(i, m) = static_cast<double>(i) / m;
  }
  for (int i = 1; i < m; ++i)
    for (int j = 1; j < m; ++j)
      nodes(i, j) = cdf(spec, UnitSquarePoint(static_cast<double>(i) / m,
                                              static_cast<double>(j) / m));
  return nodes;
}

inline Eigen::MatrixXd volumes_by_cdf_difference(const CopulaSpec& spec, int m) {
  const Eigen::MatrixXd nodes = node_cdf_grid(spec, m);
  Eigen::MatrixXd vol(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      vol(i, j) = nodes(i + 1, j + 1) - nodes(i, j + 1) - nodes(i + 1, j) + nodes(i, j);
  return vol;
}

// Student t cell volumes, one column of cells at a time: the mass of cell
// (i,j) is the integral over u in the cell of the conditional CDF difference
// at the j-th v-levels. The v-side is exact (closed-form conditional), so row
// sums telescope to 1/m up to rounding; column sums carry the quadrature
// error and are repaired by balancing afterwards.
inline Eigen::MatrixXd volumes_student_t(double rho, double nu, int m, double col_tol = 1e-12) {
  std::vector<double> y(m + 1);
  y[0] = -std::numeric_limits<double>::infinity();
  y[m] = std::numeric_limits<double>::infinity();
  for (int j = 1; j < m; ++j) y[j] = special::student_t_quantile(nu, static_cast<double>(j) / m);

  const double one_m_r2 = 1.0 - rho * rho;
  Eigen::MatrixXd vol(m, m);
  std::vector<double> cell(m), cond(m + 1);
  const auto column_integrand = [&](double s, std::vector<double>& out) {
    const double x = special::student_t_quantile(nu, s);
    const double scale = std::sqrt(one_m_r2 * (nu + x * x) / (nu + 1.0));
    cond[0] = 0.0;
    cond[m] = 1.0;
    for (int j = 1; j < m; ++j)
      cond[j] = special::student_t_cdf(nu + 1.0, (y[j] - rho * x) / scale);
    for (int j = 0; j < m; ++j) out[j] = cond[j + 1] - cond[j];
  };
  for (int i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) / m;
    const double b = static_cast<double>(i + 1) / m;
    adaptive_gl_vector(column_integrand, a, b, col_tol, static_cast<std::size_t>(m), cell);
    for (int j = 0; j < m; ++j) vol(i, j) = cell[j];
  }
  return vol;
}

// Sinkhorn-style rebalancing to doubly stochastic; the input is symmetrized
// first (all supported families are exchangeable) and re-symmetrized each
// sweep so the limit keeps both invariants.
inline void balance_doubly_stochastic(Eigen::MatrixXd& p, double tol = 1e-13,
                                      int max_sweeps = 1000) {
  p = 0.5 * (p + p.transpose()).eval();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::VectorXd row = p.rowwise().sum();
    p.array().colwise() /= row.array();
    const Eigen::RowVectorXd col = p.colwise().sum();
    p.array().rowwise() /= col.array();
    p = 0.5 * (p + p.transpose()).eval();
    const double err = std::max((p.rowwise().sum().array() - 1.0).abs().maxCoeff(),
                                (p.colwise().sum().array() - 1.0).abs().maxCoeff());
    if (err <= tol) return;
  }
}

}  // namespace detail

TransitionMatrix discretize(const CopulaSpec& spec, int m);

// Copula mass of cell (i,j), 1-based indices: exact CDF second difference for
// closed-CDF families, density quadrature (via the closed-form conditional)
// for Student t; mixtures combine linearly.
inline double cell_volume(const CopulaSpec& spec, int i, int j, int m) {
  if (m < 1) throw OutOfRangeParameter("m", "[1,4096]", m);
  if (i < 1 || i > m) throw OutOfRangeParameter("i", "[1,m]", i);
  if (j < 1 || j > m) throw OutOfRangeParameter("j", "[1,m]", j);
  switch (spec.family()) {
    case Family::mixture: {
      double out = 0.0;
      for (std::size_t k = 0; k < spec.components().size(); ++k)
        out += spec.weights()[k] * cell_volume(spec.components()[k], i, j, m);
      return out;
    }
    case Family::student_t: {
      const double rho = spec.t_rho();
      const double nu = spec.t_nu();
      const double v_lo = static_cast<double>(j - 1) / m;
      const double v_hi = static_cast<double>(j) / m;
      const auto integrand = [&](double s) {
        return detail::t_copula_conditional(rho, nu, s, v_hi) -
               detail::t_copula_conditional(rho, nu, s, v_lo);
      };
      const auto q = detail::adaptive_gl(integrand, static_cast<double>(i - 1) / m,
                                         static_cast<double>(i) / m, 1e-13);
      if (q.error_estimate > 1e-8)
        throw NumericalFailure("student t cell volume quadrature missed target",
                               q.error_estimate);
      return std::max(0.0, q.value);
    }
    default: {
      const auto at = [&](int a, int b) {
        return cdf(spec, UnitSquarePoint(static_cast<double>(a) / m,
                                         static_cast<double>(b) / m));
      };
      return at(i, j) - at(i - 1, j) - at(i, j - 1) + at(i - 1, j - 1);
    }
  }
}

inline TransitionMatrix discretize(const CopulaSpec& spec, int m) {
  if (m < 2 || m > 4096) throw OutOfRangeParameter("m", "[2,4096]", m);
  switch (spec.family()) {
    case Family::mixture: {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
      bool all_closed = true;
      for (std::size_t k = 0; k < spec.components().size(); ++k) {
        const TransitionMatrix part = discretize(spec.components()[k], m);
        acc += spec.weights()[k] * part.entries();
        all_closed = all_closed && spec.components()[k].has_closed_cdf();
      }
      return TransitionMatrix(m, std::move(acc), spec.id(),
                              all_closed ? "cdf-difference" : "density-quadrature");
    }
    case Family::student_t: {
      Eigen::MatrixXd p =
          static_cast<double>(m) * detail::volumes_student_t(spec.t_rho(), spec.t_nu(), m);
      detail::balance_doubly_stochastic(p);
      return TransitionMatrix(m, std::move(p), spec.id(), "density-quadrature");
    }
    default: {
      Eigen::MatrixXd p = static_cast<double>(m) * detail::volumes_by_cdf_difference(spec, m);
      return TransitionMatrix(m, std::move(p), spec.id(), "cdf-difference");
    }
  }
}

// Fold product of the two checkerboard copulas: exact matrix multiplication.
inline TransitionMatrix fold(const TransitionMatrix& p, const TransitionMatrix& q) {
  if (p.resolution() != q.resolution())
    throw ResolutionMismatch(p.resolution(), q.resolution());
  return TransitionMatrix(p.resolution(), p.entries() * q.entries(),
                          "fold(" + p.spec_id() + "," + q.spec_id() + ")", "derived");
}

// n-th fold power by repeated squaring.
inline TransitionMatrix power(const TransitionMatrix& p, long n) {
  if (n < 1 || n > 1000000) throw OutOfRangeParameter("n", "[1,1e6]", static_cast<double>(n));
  Eigen::MatrixXd base = p.entries();
  Eigen::MatrixXd acc;
  bool have = false;
  long k = n;
  while (k > 0) {
    if (k & 1) {
      acc = have ? (acc * base).eval() : base;
      have = true;
    }
    k >>= 1;
    if (k > 0) base = (base * base).eval();
  }
  return TransitionMatrix(p.resolution(), std::move(acc),
                          p.spec_id() + "^" + std::to_string(n), "derived");
}

inline TransitionMatrix mix(const std::vector<std::pair<double, TransitionMatrix>>& parts) {
  if (parts.empty()) throw BadWeights("mix needs at least one matrix");
  double sum = 0.0;
  for (const auto& [w, mat] : parts) {
    if (!(w >= 0.0)) throw BadWeights("negative mix weight " + detail::fmt_short(w));
    if (mat.resolution() != parts.front().second.resolution())
      throw ResolutionMismatch(parts.front().second.resolution(), mat.resolution());
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw BadWeights("mix weights sum to " + detail::fmt_short(sum) + ", expected 1");
  const int m = parts.front().second.resolution();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  std::string id = "mix(";
  for (std::size_t k = 0; k < parts.size(); ++k) {
    acc += (parts[k].first / sum) * parts[k].second.entries();
    if (k) id += "+";
    id += detail::fmt_short(parts[k].first) + "*" + parts[k].second.spec_id();
  }
  return TransitionMatrix(m, std::move(acc), id + ")", "derived");
}

// CDF of the checkerboard copula induced by the cell masses: bilinear between
// the cumulative node values, so it satisfies the copula axioms exactly.
inline double checkerboard_cdf(const TransitionMatrix& p, UnitSquarePoint pt) {
  const int m = p.resolution();
  Eigen::MatrixXd cum = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int i = 1; i <= m; ++i)
    for (int j = 1; j <= m; ++j)
      cum(i, j) = cum(i - 1, j) + cum(i, j - 1) - cum(i - 1, j - 1) + p(i - 1, j - 1) / m;
  const double s = pt.u * m;
  const double t = pt.v * m;
  const int i = std::min(m - 1, static_cast<int>(std::floor(s)));
  const int j = std::min(m - 1, static_cast<int>(std::floor(t)));
  const double a = s - i;
  const double b = t - j;
  return (1.0 - a) * (1.0 - b) * cum(i, j) + a * (1.0 - b) * cum(i + 1, j) +
         (1.0 - a) * b * cum(i, j + 1) + a * b * cum(i + 1, j + 1);
}

// Grid file: header line "m=<int>", then m rows of m entries with 17
// significant digits, row-major, LF line endings.
inline void write_matrix(std::ostream& os, const TransitionMatrix& p) {
  const int m = p.resolution();
  os << "m=" << m << "\n";
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j) os << ' ';
      os << detail::fmt_sig(p(i, j), 17);
    }
    os << "\n";
  }
}

inline TransitionMatrix read_matrix(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("m=", 0) != 0)
    throw std::invalid_argument("matrix file must start with 'm=<int>'");
  const int m = std::stoi(header.substr(2));
  if (m < 1 || m > 4096) throw OutOfRangeParameter("m", "[1,4096]", m);
  Eigen::MatrixXd e(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!(is >> e(i, j))) throw std::invalid_argument("matrix file truncated");
  return TransitionMatrix(m, std::move(e), "file", "file");
}

}  // namespace copmix
