#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "copmix/copula.hpp"
#include "copmix/errors.hpp"
#include "copmix/format.hpp"
#include "copmix/grid.hpp"
#include "copmix/rng.hpp"

namespace copmix {

// Marginal distribution for transporting the uniform chain: the identity, a
// piecewise-linear CDF, or atoms combined with a piecewise-linear part.
// Internally every non-uniform marginal is a sorted breakpoint list with the
// CDF value just before and at each point; between breakpoints the CDF is
// linear, at an atom it jumps.
class MarginalSpec {
public:
  static MarginalSpec uniform01() { return MarginalSpec(); }

  static MarginalSpec piecewise_linear(std::vector<double> x, std::vector<double> cdf) {
    validate_polyline(x, cdf);
    MarginalSpec m;
    m.kind_ = Kind::piecewise_linear;
    m.build(x, cdf, 1.0, {}, {});
    return m;
  }

  // CDF(x) = sum of atom weights at or left of x, plus (1 - total atom
  // weight) times the piecewise-linear sub-CDF. A pure atom list (weights
  // summing to 1) needs no continuous part.
  static MarginalSpec point_mass_mixture(std::vector<double> atom_x, std::vector<double> atom_w,
                                         std::vector<double> knot_x = {},
                                         std::vector<double> knot_cdf = {}) {
    if (atom_x.empty() || atom_x.size() != atom_w.size())
      throw BadWeights("point mass mixture needs matching atom positions and weights");
    for (std::size_t k = 1; k < atom_x.size(); ++k)
      if (!(atom_x[k] > atom_x[k - 1]))
        throw std::invalid_argument("atom positions must be strictly increasing");
    double total = 0.0;
    for (double w : atom_w) {
      if (!(w > 0.0)) throw BadWeights("atom weights must be positive");
      total += w;
    }
    if (total > 1.0 + 1e-12) throw BadWeights("atom weights sum beyond 1");
    const double continuous = std::max(0.0, 1.0 - total);
    MarginalSpec m;
    m.kind_ = Kind::point_mass_mixture;
    m.atom_count_ = atom_x.size();
    if (continuous > 1e-12) {
      validate_polyline(knot_x, knot_cdf);
      m.build(knot_x, knot_cdf, continuous, atom_x, atom_w);
    } else {
      m.build({}, {}, 0.0, atom_x, atom_w);
    }
    return m;
  }

  bool is_uniform() const noexcept { return kind_ == Kind::uniform01; }

  std::string id() const {
    switch (kind_) {
      case Kind::uniform01:
        return "uniform01";
      case Kind::piecewise_linear:
        return "piecewise_linear(" + std::to_string(x_.size()) + " knots)";
      case Kind::point_mass_mixture:
        return "point_mass_mixture(" + std::to_string(atom_count_) + " atoms)";
    }
    return "?";
  }

  double cdf(double x) const {
    if (kind_ == Kind::uniform01) return std::clamp(x, 0.0, 1.0);
    if (x < x_.front()) return 0.0;
    if (x >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin());  // x_[k-1] <= x < x_[k]
    const double span = x_[k] - x_[k - 1];
    const double t = span > 0.0 ? (x - x_[k - 1]) / span : 0.0;
    return f_at_[k - 1] + t * (f_before_[k] - f_at_[k - 1]);
  }

  // Generalized inverse F^-1(u) = inf{x : F(x) >= u}: flat stretches give
  // the left endpoint, jumps give the jump location.
  double generalized_inverse(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw OutOfRangeParameter("u", "[0,1]", u);
    if (kind_ == Kind::uniform01) return u;
    if (u <= f_at_.front()) return x_.front();
    // smallest breakpoint with F(point) >= u
    const auto it = std::lower_bound(f_at_.begin(), f_at_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - f_at_.begin());
    if (u > f_before_[k]) return x_[k];  // crossed at the jump
    const double f0 = f_at_[k - 1];
    const double f1 = f_before_[k];
    if (f1 == f0) return x_[k];  // flat piece, crossing sits at its right end
    const double t = (u - f0) / (f1 - f0);
    return x_[k - 1] + t * (x_[k] - x_[k - 1]);
  }

private:
  enum class Kind { uniform01, piecewise_linear, point_mass_mixture };

  MarginalSpec() = default;

  static void validate_polyline(const std::vector<double>& x, const std::vector<double>& cdf) {
    if (x.size() < 2 || x.size() != cdf.size())
      throw std::invalid_argument("piecewise-linear CDF needs matching knots, at least 2");
    if (cdf.front() != 0.0 || cdf.back() != 1.0)
      throw std::invalid_argument("piecewise-linear CDF must start at 0 and end at 1");
    for (std::size_t k = 1; k < x.size(); ++k) {
      if (!(x[k] > x[k - 1])) throw std::invalid_argument("knots must be strictly increasing");
      if (cdf[k] < cdf[k - 1]) throw std::invalid_argument("CDF values must be nondecreasing");
    }
  }

  void build(const std::vector<double>& knot_x, const std::vector<double>& knot_cdf,
             double continuous_weight, const std::vector<double>& atom_x,
             const std::vector<double>& atom_w) {
    std::vector<double> points(knot_x);
    points.insert(points.end(), atom_x.begin(), atom_x.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());

    const auto continuous_cdf = [&](double x) {
      if (continuous_weight == 0.0) return 0.0;
      if (x <= knot_x.front()) return 0.0;
      if (x >= knot_x.back()) return continuous_weight;
      const auto it = std::upper_bound(knot_x.begin(), knot_x.end(), x);
      const std::size_t k = static_cast<std::size_t>(it - knot_x.begin());
      const double t = (x - knot_x[k - 1]) / (knot_x[k] - knot_x[k - 1]);
      return continuous_weight * (knot_cdf[k - 1] + t * (knot_cdf[k] - knot_cdf[k - 1]));
    };

    x_ = points;
    f_before_.resize(points.size());
    f_at_.resize(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
      double atoms_left = 0.0, atom_here = 0.0;
      for (std::size_t a = 0; a < atom_x.size(); ++a) {
        if (atom_x[a] < points[k]) atoms_left += atom_w[a];
        if (atom_x[a] == points[k]) atom_here = atom_w[a];
      }
      f_before_[k] = continuous_cdf(points[k]) + atoms_left;
      f_at_[k] = f_before_[k] + atom_here;
    }
    f_at_.back() = 1.0;  // exact upper end
  }

  Kind kind_ = Kind::uniform01;
  std::vector<double> x_;         // breakpoints (knots and atoms merged)
  std::vector<double> f_before_;  // CDF left limit at each breakpoint
  std::vector<double> f_at_;      // CDF value at each breakpoint
  std::size_t atom_count_ = 0;
};

inline double generalized_inverse(const MarginalSpec& marginal, double u) {
  return marginal.generalized_inverse(u);
}

struct ChainPath {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string spec_id;
  std::string marginal_id;
  std::string generator_id;
};

// Stationary chain: U_0 is the seeded generator's draw at index 0, each
// transition uses the innovation draw at index k+1, and outputs are
// F^{-1}(U_k). The recursion runs in uniform space, so the same seed yields
// bitwise identical chains for every marginal (robustness of the copula).
inline ChainPath sample_chain(const CopulaSpec& spec, const MarginalSpec& marginal,
                              std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("chain length must be at least 1");
  ChainPath path;
  path.values.reserve(n);
  path.seed = seed;
  path.spec_id = spec.id();
  path.marginal_id = marginal.id();
  path.generator_id = Philox::kGeneratorId;
  double u = Philox::uniform01(seed, 0);
  for (std::size_t k = 0; k < n; ++k) {
    path.values.push_back(marginal.generalized_inverse(u));
    if (k + 1 < n) {
      const double innovation = Philox::uniform01(seed, k + 1);
      double next;
      try {
        next = inverse_conditional(spec, u, innovation, 1e-12);
      } catch (const NoConvergence& e) {
        throw NoConvergence(e.what(), e.bracket_width(), static_cast<long>(k));
      }
      u = detail::clamp_interior(next);
    }
  }
  return path;
}

struct EmpiricalTransition {
  TransitionMatrix matrix;
  std::vector<int> empty_rows;  // rows never visited, filled uniform
};

// Row-normalized counts of consecutive cell co-occurrences of a
// uniform-marginal path. Rows sum to one exactly; column sums only
// approximately (sampling noise).
inline EmpiricalTransition empirical_transition(const ChainPath& path, int m) {
  if (path.marginal_id != "uniform01")
    throw std::invalid_argument("empirical_transition needs a uniform01-marginal path");
  if (m < 2 || m > 4096) throw OutOfRangeParameter("m", "[2,4096]", m);
  const std::size_t required = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  if (path.values.size() < required) throw TooShort(path.values.size(), required);
  const auto cell = [m](double u) {
    return std::min(m - 1, static_cast<int>(std::floor(u * m)));
  };
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k + 1 < path.values.size(); ++k)
    counts(cell(path.values[k]), cell(path.values[k + 1])) += 1.0;
  std::vector<int> empty;
  for (int i = 0; i < m; ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0)
      counts.row(i) /= total;
    else {
      counts.row(i).setConstant(1.0 / m);
      empty.push_back(i);
    }
  }
  return {TransitionMatrix(m, std::move(counts), path.spec_id, "empirical"), std::move(empty)};
}

// Kolmogorov-Smirnov distance of the sample from the uniform law on [0,1].
inline double ks_uniform_statistic(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = std::clamp(values[i], 0.0, 1.0);
    d = std::max(d, std::max((i + 1) / n - x, x - i / n));
  }
  return d;
}

// Path CSV: '#'-prefixed metadata, then index,value rows at 17 significant
// digits.
inline void write_path_csv(std::ostream& os, const ChainPath& path) {
  os << "# spec=" << path.spec_id << "\n";
  os << "# marginal=" << path.marginal_id << "\n";
  os << "# seed=" << path.seed << "\n";
  os << "# generator=" << path.generator_id << "\n";
  os << "index,value\n";
  for (std::size_t k = 0; k < path.values.size(); ++k)
    os << k << ',' << detail::fmt_sig(path.values[k], 17) << "\n";
}

}  // namespace copmix
