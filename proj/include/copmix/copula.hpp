#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "copmix/errors.hpp"
#include "copmix/quadrature.hpp"
#include "copmix/student_t.hpp"

namespace copmix {

enum class Family { independence, frechet_m, clayton, gumbel, student_t, marshall_olkin, mixture };

namespace detail {

inline std::string fmt_short(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

inline constexpr double kInteriorClamp = 1e-15;

inline double clamp_interior(double x) {
  return std::min(1.0 - kInteriorClamp, std::max(kInteriorClamp, x));
}

}  // namespace detail

struct UnitSquarePoint {
  double u;
  double v;

  UnitSquarePoint(double u_, double v_) : u(u_), v(v_) {
    if (!(u >= 0.0 && u <= 1.0)) throw OutOfRangeParameter("u", "[0,1]", u);
    if (!(v >= 0.0 && v <= 1.0)) throw OutOfRangeParameter("v", "[0,1]", v);
  }
};

// Validated description of a copula family or a convex mixture of them.
// Construction is the validation step: factories reject out-of-range
// parameters, bad mixture weights, and nesting deeper than 4 levels.
class CopulaSpec {
public:
  static CopulaSpec independence() { return CopulaSpec(Family::independence); }

  static CopulaSpec frechet_m() { return CopulaSpec(Family::frechet_m); }

  static CopulaSpec clayton(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw OutOfRangeParameter("theta", "(0,inf)", theta);
    CopulaSpec s(Family::clayton);
    s.p0_ = theta;
    return s;
  }

  static CopulaSpec gumbel(double beta) {
    if (!(beta >= 1.0) || !std::isfinite(beta)) throw OutOfRangeParameter("beta", "[1,inf)", beta);
    CopulaSpec s(Family::gumbel);
    s.p0_ = beta;
    return s;
  }

  static CopulaSpec student_t(double rho, double nu) {
    if (!(rho > -1.0 && rho < 1.0)) throw OutOfRangeParameter("rho", "(-1,1)", rho);
    if (!(nu > 2.0) || !std::isfinite(nu)) throw OutOfRangeParameter("nu", "(2,inf)", nu);
    CopulaSpec s(Family::student_t);
    s.p0_ = rho;
    s.p1_ = nu;
    return s;
  }

  static CopulaSpec marshall_olkin(double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw OutOfRangeParameter("alpha", "[0,1]", alpha);
    if (!(beta >= 0.0 && beta <= 1.0)) throw OutOfRangeParameter("beta", "[0,1]", beta);
    CopulaSpec s(Family::marshall_olkin);
    s.p0_ = alpha;
    s.p1_ = beta;
    return s;
  }

  // Weights must be nonnegative and sum to 1 within 1e-12; a sum inside that
  // band is renormalized, anything else is rejected.
  static CopulaSpec mixture(std::vector<CopulaSpec> components, std::vector<double> weights) {
    if (components.empty()) throw BadWeights("mixture needs at least one component");
    if (components.size() != weights.size())
      throw BadWeights("mixture has " + std::to_string(components.size()) + " components but " +
                       std::to_string(weights.size()) + " weights");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw BadWeights("negative mixture weight " + detail::fmt_short(w));
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw BadWeights("mixture weights sum to " + detail::fmt_short(sum) + ", expected 1");
    for (double& w : weights) w /= sum;
    CopulaSpec s(Family::mixture);
    s.components_ = std::move(components);
    s.weights_ = std::move(weights);
    if (s.depth() > 4) throw OutOfRangeParameter("mixture nesting depth", "[1,4]", s.depth());
    return s;
  }

  Family family() const noexcept { return family_; }
  double theta() const noexcept { return p0_; }
  double gumbel_beta() const noexcept { return p0_; }
  double t_rho() const noexcept { return p0_; }
  double t_nu() const noexcept { return p1_; }
  double mo_alpha() const noexcept { return p0_; }
  double mo_beta() const noexcept { return p1_; }
  const std::vector<CopulaSpec>& components() const noexcept { return components_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  // True when the copula measure carries mass on a curve. The flag is
  // declared per family: any Marshall-Olkin with a nonzero exponent and the
  // Frechet upper bound.
  bool has_singular_part() const {
    switch (family_) {
      case Family::frechet_m:
        return true;
      case Family::marshall_olkin:
        return !(p0_ == 0.0 && p1_ == 0.0);
      case Family::mixture:
        return std::any_of(components_.begin(), components_.end(),
                           [](const CopulaSpec& c) { return c.has_singular_part(); });
      default:
        return false;
    }
  }

  // True when the CDF evaluates in closed form (everything but Student t).
  bool has_closed_cdf() const {
    switch (family_) {
      case Family::student_t:
        return false;
      case Family::mixture:
        return std::all_of(components_.begin(), components_.end(),
                           [](const CopulaSpec& c) { return c.has_closed_cdf(); });
      default:
        return true;
    }
  }

  int depth() const {
    if (family_ != Family::mixture) return 1;
    int d = 0;
    for (const auto& c : components_) d = std::max(d, c.depth());
    return d + 1;
  }

  std::string id() const {
    using detail::fmt_short;
    switch (family_) {
      case Family::independence:
        return "independence";
      case Family::frechet_m:
        return "frechet_m";
      case Family::clayton:
        return "clayton(theta=" + fmt_short(p0_) + ")";
      case Family::gumbel:
        return "gumbel(beta=" + fmt_short(p0_) + ")";
      case Family::student_t:
        return "student_t(rho=" + fmt_short(p0_) + ",nu=" + fmt_short(p1_) + ")";
      case Family::marshall_olkin:
        return "marshall_olkin(alpha=" + fmt_short(p0_) + ",beta=" + fmt_short(p1_) + ")";
      case Family::mixture: {
        std::string out = "mix(";
        for (std::size_t k = 0; k < components_.size(); ++k) {
          if (k) out += "+";
          out += fmt_short(weights_[k]) + "*" + components_[k].id();
        }
        return out + ")";
      }
    }
    return "?";
  }

private:
  explicit CopulaSpec(Family f) : family_(f) {}

  Family family_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  std::vector<CopulaSpec> components_;
  std::vector<double> weights_;
};

struct Density {
  double value;
  bool singular_part;
};

double cdf(const CopulaSpec& spec, UnitSquarePoint p);
double conditional_cdf(const CopulaSpec& spec, double u, double v);
Density density(const CopulaSpec& spec, UnitSquarePoint p);
double inverse_conditional(const CopulaSpec& spec, double u, double prob, double tol);

namespace detail {

// ---- Clayton, log domain so large theta cannot overflow u^(-theta) ----

inline double clayton_log_s(double theta, double u, double v) {
  const double a = -theta * std::log(u);
  const double b = -theta * std::log(v);
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == 0.0) return 0.0;
  return hi + std::log1p(std::exp(lo - hi) - std::exp(-hi));
}

inline double clayton_cdf(double theta, double u, double v) {
  return std::exp(-clayton_log_s(theta, u, v) / theta);
}

inline double clayton_conditional(double theta, double u, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double a = -theta * std::log(u);
  const double ls = clayton_log_s(theta, u, v);
  return std::exp((theta + 1.0) / theta * (a - ls));
}

inline double clayton_density(double theta, double u, double v) {
  const double a = -theta * std::log(u);
  const double b = -theta * std::log(v);
  const double ls = clayton_log_s(theta, u, v);
  return std::exp(std::log1p(theta) + (theta + 1.0) / theta * (a + b) -
                  (2.0 * theta + 1.0) / theta * ls);
}

inline double clayton_inverse_conditional(double theta, double u, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double a = -theta * std::log(u);
  const double g = std::expm1(-theta / (1.0 + theta) * std::log(p));
  const double lt = a + std::log(g);
  const double log1p_term = lt > 36.0 ? lt : std::log1p(std::exp(lt));
  return std::exp(-log1p_term / theta);
}

// ---- Gumbel ----

inline double gumbel_log_s(double beta, double lu, double lv) {
  const double t1 = beta * std::log(lu);
  const double t2 = beta * std::log(lv);
  const double hi = std::max(t1, t2);
  const double lo = std::min(t1, t2);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double gumbel_cdf(double beta, double u, double v) {
  const double lu = -std::log(u);
  const double lv = -std::log(v);
  if (lu == 0.0) return v;
  if (lv == 0.0) return u;
  return std::exp(-std::exp(gumbel_log_s(beta, lu, lv) / beta));
}

inline double gumbel_conditional(double beta, double u, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double lu = -std::log(u);
  const double lv = -std::log(v);
  const double ls = gumbel_log_s(beta, lu, lv);
  return std::exp(-std::exp(ls / beta) + (beta - 1.0) * std::log(lu) +
                  (1.0 / beta - 1.0) * ls + lu);
}

inline double gumbel_density(double beta, double u, double v) {
  const double lu = -std::log(u);
  const double lv = -std::log(v);
  const double ls = gumbel_log_s(beta, lu, lv);
  const double a = std::exp(ls / beta);
  return std::exp(-a + lu + lv + (beta - 1.0) * (std::log(lu) + std::log(lv)) +
                  (2.0 / beta - 2.0) * ls) *
         (1.0 + (beta - 1.0) / a);
}

// ---- Marshall-Olkin; the a.c. density lives off the curve v^alpha = u^beta ----

inline bool mo_upper_branch(double alpha, double beta, double u, double v) {
  // v^alpha >= u^beta, written in logs to dodge 0^0 corners
  return alpha * std::log(v) >= beta * std::log(u);
}

inline double mo_cdf(double alpha, double beta, double u, double v) {
  return mo_upper_branch(alpha, beta, u, v) ? u * std::pow(v, 1.0 - alpha)
                                            : v * std::pow(u, 1.0 - beta);
}

inline double mo_conditional(double alpha, double beta, double u, double v) {
  if (v <= 0.0) return 0.0;
  return mo_upper_branch(alpha, beta, u, v) ? std::pow(v, 1.0 - alpha)
                                            : (1.0 - beta) * v * std::pow(u, -beta);
}

inline double mo_density(double alpha, double beta, double u, double v) {
  return mo_upper_branch(alpha, beta, u, v) ? (1.0 - alpha) * std::pow(v, -alpha)
                                            : (1.0 - beta) * std::pow(u, -beta);
}

// ---- Student t ----

inline double t_copula_conditional(double rho, double nu, double u, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  const double x = special::student_t_quantile(nu, u);
  const double y = special::student_t_quantile(nu, v);
  return special::bivariate_t_conditional(rho, nu, x, y);
}

// CDF as the integral over s in (0,min(u,v)) of the closed-form conditional.
// The integrand is bounded and smooth, with boundary layers near s=0 and s=1
// that the adaptive rule resolves; absolute error target 1e-8 per call.
// Arguments are ordered first, which makes exchange symmetry exact.
inline double t_copula_cdf(double rho, double nu, double u, double v) {
  if (v < u) std::swap(u, v);
  const double y = special::student_t_quantile(nu, v);
  const auto integrand = [&](double s) {
    const double x = special::student_t_quantile(nu, s);
    return special::bivariate_t_conditional(rho, nu, x, y);
  };
  const auto q = adaptive_gl(integrand, 0.0, u, 1e-10);
  if (q.error_estimate > 1e-8)
    throw NumericalFailure("student t cdf quadrature missed 1e-8 target", q.error_estimate);
  return std::min(1.0, std::max(0.0, q.value));
}

inline double t_copula_density(double rho, double nu, double u, double v) {
  const double x = special::student_t_quantile(nu, u);
  const double y = special::student_t_quantile(nu, v);
  return special::bivariate_t_pdf(rho, nu, x, y) /
         (special::student_t_pdf(nu, x) * special::student_t_pdf(nu, y));
}

inline double t_copula_inverse_conditional(double rho, double nu, double u, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double x = special::student_t_quantile(nu, u);
  const double scale = std::sqrt((1.0 - rho * rho) * (nu + x * x) / (nu + 1.0));
  const double y = rho * x + scale * special::student_t_quantile(nu + 1.0, p);
  return special::student_t_cdf(nu, y);
}

// Leftmost v with conditional_cdf(spec,u,v) >= p, by bisection on the
// predicate; lands on the jump location when the conditional law has atoms.
inline double bisect_inverse(const CopulaSpec& spec, double u, double p, double tol) {
  if (p <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    if (hi - lo <= tol) return hi;
    const double mid = 0.5 * (lo + hi);
    if (conditional_cdf(spec, u, mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  if (hi - lo <= tol) return hi;
  throw NoConvergence("inverse_conditional bisection exhausted 200 iterations", hi - lo);
}

}  // namespace detail

inline double cdf(const CopulaSpec& spec, UnitSquarePoint p) {
  const double u = p.u;
  const double v = p.v;
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  switch (spec.family()) {
    case Family::independence:
      return u * v;
    case Family::frechet_m:
      return std::min(u, v);
    case Family::clayton:
      return detail::clayton_cdf(spec.theta(), u, v);
    case Family::gumbel:
      return detail::gumbel_cdf(spec.gumbel_beta(), u, v);
    case Family::student_t:
      return detail::t_copula_cdf(spec.t_rho(), spec.t_nu(), u, v);
    case Family::marshall_olkin:
      return detail::mo_cdf(spec.mo_alpha(), spec.mo_beta(), u, v);
    case Family::mixture: {
      double out = 0.0;
      for (std::size_t k = 0; k < spec.components().size(); ++k)
        out += spec.weights()[k] * cdf(spec.components()[k], p);
      return out;
    }
  }
  return 0.0;
}

// Pr(U_1 <= v | U_0 = u): nondecreasing and right-continuous in v, with jumps
// where the conditional law has atoms (Frechet-M, Marshall-Olkin).
inline double conditional_cdf(const CopulaSpec& spec, double u, double v) {
  if (!(u > 0.0 && u < 1.0)) throw OutOfRangeParameter("u", "(0,1)", u);
  if (!(v >= 0.0 && v <= 1.0)) throw OutOfRangeParameter("v", "[0,1]", v);
  switch (spec.family()) {
    case Family::independence:
      return v;
    case Family::frechet_m:
      return v >= u ? 1.0 : 0.0;
    case Family::clayton:
      return detail::clayton_conditional(spec.theta(), u, v);
    case Family::gumbel:
      return detail::gumbel_conditional(spec.gumbel_beta(), u, v);
    case Family::student_t:
      return detail::t_copula_conditional(spec.t_rho(), spec.t_nu(), u, v);
    case Family::marshall_olkin:
      return detail::mo_conditional(spec.mo_alpha(), spec.mo_beta(), u, v);
    case Family::mixture: {
      double out = 0.0;
      for (std::size_t k = 0; k < spec.components().size(); ++k)
        out += spec.weights()[k] * conditional_cdf(spec.components()[k], u, v);
      return out;
    }
  }
  return 0.0;
}

// Density of the absolutely continuous part only; coordinates are clamped to
// [1e-15, 1-1e-15] before evaluation (boundary values are measure zero).
inline Density density(const CopulaSpec& spec, UnitSquarePoint p) {
  const double u = detail::clamp_interior(p.u);
  const double v = detail::clamp_interior(p.v);
  switch (spec.family()) {
    case Family::independence:
      return {1.0, false};
    case Family::frechet_m:
      return {0.0, true};
    case Family::clayton:
      return {detail::clayton_density(spec.theta(), u, v), false};
    case Family::gumbel:
      return {detail::gumbel_density(spec.gumbel_beta(), u, v), false};
    case Family::student_t:
      return {detail::t_copula_density(spec.t_rho(), spec.t_nu(), u, v), false};
    case Family::marshall_olkin:
      return {detail::mo_density(spec.mo_alpha(), spec.mo_beta(), u, v),
              spec.has_singular_part()};
    case Family::mixture: {
      double val = 0.0;
      bool singular = false;
      for (std::size_t k = 0; k < spec.components().size(); ++k) {
        const Density d = density(spec.components()[k], p);
        val += spec.weights()[k] * d.value;
        singular = singular || d.singular_part;
      }
      return {val, singular};
    }
  }
  return {0.0, false};
}

// Leftmost v with conditional_cdf(spec,u,v) >= prob, to within tol.
// Closed forms for independence, Clayton and Student t; bisection otherwise.
inline double inverse_conditional(const CopulaSpec& spec, double u, double prob, double tol) {
  if (!(u > 0.0 && u < 1.0)) throw OutOfRangeParameter("u", "(0,1)", u);
  if (!(prob >= 0.0 && prob <= 1.0)) throw OutOfRangeParameter("prob", "[0,1]", prob);
  if (!(tol > 0.0)) throw OutOfRangeParameter("tol", "(0,inf)", tol);
  switch (spec.family()) {
    case Family::independence:
      return prob;
    case Family::clayton:
      return detail::clayton_inverse_conditional(spec.theta(), u, prob);
    case Family::student_t:
      return detail::t_copula_inverse_conditional(spec.t_rho(), spec.t_nu(), u, prob);
    default:
      return detail::bisect_inverse(spec, u, prob, tol);
  }
}

inline double cdf(const CopulaSpec& spec, double u, double v) {
  return cdf(spec, UnitSquarePoint(u, v));
}

inline Density density(const CopulaSpec& spec, double u, double v) {
  return density(spec, UnitSquarePoint(u, v));
}

}  // namespace copmix
