#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "copmix/errors.hpp"

namespace copmix::detail {

// 7- and 15-point Gauss-Legendre rules on [-1,1]; the pair gives a cheap
// per-panel error estimate for adaptive bisection.
inline constexpr double kGl7X[7] = {
    -0.94910791234275849, -0.74153118559939446, -0.40584515137739718, 0.0,
    0.40584515137739718,  0.74153118559939446,  0.94910791234275849};
inline constexpr double kGl7W[7] = {
    0.12948496616887065, 0.27970539148927659, 0.38183005050511831, 0.41795918367346896,
    0.38183005050511831, 0.27970539148927659, 0.12948496616887065};
inline constexpr double kGl15X[15] = {
    -0.98799251802048538, -0.93727339240070595, -0.84820658341042721, -0.72441773136017007,
    -0.57097217260853883, -0.39415134707756339, -0.20119409399743451, 0.0,
    0.20119409399743451,  0.39415134707756339,  0.57097217260853883,  0.72441773136017007,
    0.84820658341042721,  0.93727339240070595,  0.98799251802048538};
inline constexpr double kGl15W[15] = {
    0.030753241996118647, 0.070366047488108069, 0.10715922046717177, 0.13957067792615391,
    0.16626920581699378,  0.18616100001556188,  0.19843148532711125, 0.2025782419255609,
    0.19843148532711125,  0.18616100001556188,  0.16626920581699378, 0.13957067792615391,
    0.10715922046717177,  0.070366047488108069, 0.030753241996118647};

template <typename F>
double gl_panel(const F& f, double a, double b, const double* x, const double* w, int n) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += w[i] * f(mid + half * x[i]);
  return half * acc;
}

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Adaptive Gauss-Legendre with panel bisection; absolute tolerance.
template <typename F>
QuadResult adaptive_gl(const F& f, double a, double b, double abs_tol, int max_depth = 30) {
  struct Panel {
    double a, b, tol;
    int depth;
  };
  QuadResult out;
  std::vector<Panel> stack{{a, b, abs_tol, 0}};
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double coarse = gl_panel(f, p.a, p.b, kGl7X, kGl7W, 7);
    const double fine = gl_panel(f, p.a, p.b, kGl15X, kGl15W, 15);
    const double err = std::abs(fine - coarse);
    if (err <= p.tol || p.depth >= max_depth) {
      out.value += fine;
      out.error_estimate += err;
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    stack.push_back({p.a, mid, 0.5 * p.tol, p.depth + 1});
    stack.push_back({mid, p.b, 0.5 * p.tol, p.depth + 1});
  }
  return out;
}

// Vector-valued variant: integrates f : double -> span written into a caller
// buffer, refining on the worst component. Used for whole-column transition
// masses where every evaluation shares one expensive quantile transform.
template <typename F>
void adaptive_gl_vector(const F& f, double a, double b, double abs_tol, std::size_t dim,
                        std::vector<double>& result, int max_depth = 24) {
  struct Panel {
    double a, b, tol;
    int depth;
  };
  result.assign(dim, 0.0);
  std::vector<double> eval(dim), coarse(dim), fine(dim);
  std::vector<Panel> stack{{a, b, abs_tol, 0}};
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    const double half = 0.5 * (p.b - p.a);
    coarse.assign(dim, 0.0);
    fine.assign(dim, 0.0);
    for (int i = 0; i < 7; ++i) {
      f(mid + half * kGl7X[i], eval);
      for (std::size_t k = 0; k < dim; ++k) coarse[k] += kGl7W[i] * eval[k];
    }
    for (int i = 0; i < 15; ++i) {
      f(mid + half * kGl15X[i], eval);
      for (std::size_t k = 0; k < dim; ++k) fine[k] += kGl15W[i] * eval[k];
    }
    double err = 0.0;
    for (std::size_t k = 0; k < dim; ++k) err = std::max(err, half * std::abs(fine[k] - coarse[k]));
    if (err <= p.tol || p.depth >= max_depth) {
      for (std::size_t k = 0; k < dim; ++k) result[k] += half * fine[k];
      continue;
    }
    stack.push_back({p.a, mid, 0.5 * p.tol, p.depth + 1});
    stack.push_back({mid, p.b, 0.5 * p.tol, p.depth + 1});
  }
}

}  // namespace copmix::detail
