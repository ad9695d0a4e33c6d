// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "copmix/experiment.hpp"

using namespace copmix;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) { return detail::fmt_sig(x, 6); }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// 1. Independence sanity: m=64, all lag-1 coefficients at numerical zero.
Check criterion1() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = discretize(CopulaSpec::independence(), 64);
  const double b = beta_coeff(p), r = rho_coeff(p), f = phi_coeff(p);
  const double elapsed = seconds_since(t0);
  c.require(b <= 1e-10, "beta1 <= 1e-10");
  c.require(r <= 1e-10, "rho1 <= 1e-10");
  c.require(f <= 1e-10, "phi1 <= 1e-10");
  c.require(elapsed < 1.0, "runtime < 1s");
  c.note("beta1=" + fmt(b) + " rho1=" + fmt(r) + " phi1=" + fmt(f) + " in " + fmt(elapsed) +
         "s");
  return c;
}

// 2. Frechet-M degenerate chain: rho_n pinned at 1, Doeblin not applicable.
Check criterion2() {
  Check c;
  const auto prof = mixing_profile(CopulaSpec::frechet_m(), 64, 10);
  for (int n = 1; n <= 10; ++n)
    c.require(std::abs(prof.rho[n - 1] - 1.0) <= 1e-9,
              "rho_" + std::to_string(n) + " = 1 +- 1e-9");
  const auto rep = doeblin_report(CopulaSpec::frechet_m(), 64);
  c.require(!rep.applicable, "doeblin not applicable");
  c.note("rho10=" + fmt(prof.rho[9]));
  return c;
}

// 3. Closed-form mixture a*Pi + (1-a)*M at m=64.
Check criterion3() {
  Check c;
  const int m = 64;
  for (double a : {0.25, 0.5, 0.75}) {
    const auto spec = CopulaSpec::mixture(
        {CopulaSpec::independence(), CopulaSpec::frechet_m()}, {a, 1.0 - a});
    const auto p = discretize(spec, m);
    const double expected_bf = (1.0 - a) * (1.0 - 1.0 / m);
    c.require(std::abs(rho_coeff(p) - (1.0 - a)) <= 1e-9,
              "rho1 = 1-a at a=" + fmt(a));
    c.require(std::abs(beta_coeff(p) - expected_bf) <= 1e-9,
              "beta1 = (1-a)(1-1/m) at a=" + fmt(a));
    c.require(std::abs(phi_coeff(p) - expected_bf) <= 1e-9,
              "phi1 = (1-a)(1-1/m) at a=" + fmt(a));
  }
  return c;
}

// 4. Geometric rho-mixing families: rho1 < 0.99 at m=128, stable vs m=256.
Check criterion4() {
  Check c;
  const std::vector<CopulaSpec> fams = {CopulaSpec::clayton(1.0), CopulaSpec::gumbel(2.0),
                                        CopulaSpec::student_t(0.5, 3.0)};
  for (const auto& spec : fams) {
    const auto t0 = std::chrono::steady_clock::now();
    const double r128 = rho_coeff(discretize(spec, 128));
    const double r256 = rho_coeff(discretize(spec, 256));
    const double elapsed = seconds_since(t0);
    c.require(r128 < 0.99, spec.id() + " rho1 < 0.99");
    c.require(std::abs(r128 - r256) < 0.02, spec.id() + " |rho(128)-rho(256)| < 0.02");
    c.require(elapsed < 60.0, spec.id() + " runtime < 60s");
    c.note(spec.id() + ": rho128=" + fmt(r128) + " rho256=" + fmt(r256) + " in " +
           fmt(elapsed) + "s");
  }
  return c;
}

// 5. Mixture theorem: equal-weight Clayton+Gumbel+t mixture at m=128.
Check criterion5() {
  Check c;
  const std::vector<CopulaSpec> comps = {CopulaSpec::clayton(1.0), CopulaSpec::gumbel(2.0),
                                         CopulaSpec::student_t(0.5, 3.0)};
  const double w = 1.0 / 3.0;
  std::vector<std::pair<double, TransitionMatrix>> parts;
  double bound = 0.0;
  for (const auto& spec : comps) {
    parts.emplace_back(w, discretize(spec, 128));
    bound += w * rho_coeff(parts.back().second);
  }
  const double rho_mix = rho_coeff(mix(parts));
  c.require(rho_mix <= bound + 1e-9, "rho(mix) <= sum w_k rho_k + 1e-9");
  c.require(rho_mix < 1.0, "rho(mix) < 1");
  c.note("rho(mix)=" + fmt(rho_mix) + " bound=" + fmt(bound));
  return c;
}

// 6. Decay inequalities on every computed profile, n_max=10.
Check criterion6() {
  Check c;
  const std::vector<CopulaSpec> specs = {
      CopulaSpec::clayton(1.0), CopulaSpec::gumbel(2.0), CopulaSpec::marshall_olkin(0.5, 0.5),
      CopulaSpec::mixture({CopulaSpec::independence(), CopulaSpec::frechet_m()}, {0.5, 0.5}),
      CopulaSpec::mixture({CopulaSpec::clayton(1.0), CopulaSpec::gumbel(2.0)}, {0.5, 0.5})};
  for (const auto& spec : specs) {
    const auto prof = mixing_profile(spec, 128, 10);
    for (int n = 1; n <= 10; ++n) {
      const int k = n - 1;
      c.require(prof.rho[k] <= std::pow(prof.rho[0], n) + 1e-9,
                spec.id() + " rho_n <= rho1^n at n=" + std::to_string(n));
      c.require(prof.beta[k] <= prof.phi[k] + 1e-12,
                spec.id() + " beta_n <= phi_n at n=" + std::to_string(n));
      c.require(prof.rho[k] <= 2.0 * std::sqrt(prof.phi[k]) + 1e-9,
                spec.id() + " rho_n <= 2 sqrt(phi_n) at n=" + std::to_string(n));
    }
  }
  c.note(std::to_string(specs.size()) + " profiles checked");
  return c;
}

// 7. Doeblin bound for a*Pi + (1-a)*Clayton(1): grid phi1 <= 1 - a/(1+a).
Check criterion7() {
  Check c;
  for (double a : {0.2, 0.5, 0.8}) {
    const auto spec = CopulaSpec::mixture(
        {CopulaSpec::independence(), CopulaSpec::clayton(1.0)}, {a, 1.0 - a});
    const double phi1 = phi_coeff(discretize(spec, 128));
    const double bound = 1.0 - a / (1.0 + a);
    c.require(phi1 <= bound + 1e-9, "phi1 <= 1-a/(1+a) at a=" + fmt(a));
    c.note("a=" + fmt(a) + ": phi1=" + fmt(phi1) + " bound=" + fmt(bound));
  }
  return c;
}

// 8. Marshall-Olkin(0.5,0.5): strictly decreasing phi profile, halving by lag 10.
Check criterion8() {
  Check c;
  const auto spec = CopulaSpec::marshall_olkin(0.5, 0.5);
  const auto p = discretize(spec, 128);
  c.require(p.is_doubly_stochastic(1e-12), "doubly stochastic within 1e-12");
  const auto prof = mixing_profile_from(p, 10, spec.id());
  for (int n = 2; n <= 10; ++n)
    c.require(prof.phi[n - 1] < prof.phi[n - 2],
              "phi strictly decreasing at n=" + std::to_string(n));
  c.require(prof.phi[9] < 0.5 * prof.phi[4], "phi10 < 0.5 phi5");
  c.note("phi5=" + fmt(prof.phi[4]) + " phi10=" + fmt(prof.phi[9]));
  return c;
}

// 9. Absolute regularity evidence: Clayton(1) beta profile decays.
Check criterion9() {
  Check c;
  const auto prof = mixing_profile(CopulaSpec::clayton(1.0), 128, 20);
  for (int n = 2; n <= 20; ++n)
    c.require(prof.beta[n - 1] <= prof.beta[n - 2] + 1e-15,
              "beta nonincreasing at n=" + std::to_string(n));
  c.require(prof.beta[19] < 0.5 * prof.beta[4], "beta20 < 0.5 beta5");
  c.note("beta5=" + fmt(prof.beta[4]) + " beta20=" + fmt(prof.beta[19]));
  return c;
}

// 10. Grid vs simulation cross-check for Clayton(1).
Check criterion10() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = CopulaSpec::clayton(1.0);
  const auto path = sample_chain(spec, MarginalSpec::uniform01(), 1000000, 20120601);
  const auto est = empirical_transition(path, 8);
  const auto exact = discretize(spec, 8);
  double worst_tv = 0.0;
  for (int i = 0; i < 8; ++i)
    worst_tv = std::max(worst_tv, 0.5 * (est.matrix.entries().row(i) -
                                         exact.entries().row(i)).lpNorm<1>());
  const double elapsed = seconds_since(t0);
  c.require(worst_tv < 0.02, "max row TV < 0.02");
  c.require(elapsed < 30.0, "runtime < 30s");
  c.note("max_row_tv=" + fmt(worst_tv) + " in " + fmt(elapsed) + "s");
  return c;
}

// 11. Exactness of the discretization algebra.
Check criterion11() {
  Check c;
  const std::vector<CopulaSpec> cdf_families = {
      CopulaSpec::independence(), CopulaSpec::frechet_m(), CopulaSpec::clayton(1.0),
      CopulaSpec::gumbel(2.0), CopulaSpec::marshall_olkin(0.5, 0.5)};
  const int m = 32;
  for (const auto& spec : cdf_families) {
    const auto coarse = discretize(spec, m);
    const auto fine = discretize(spec, 2 * m);
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double block = fine(2 * i, 2 * j) + fine(2 * i, 2 * j + 1) +
                             fine(2 * i + 1, 2 * j) + fine(2 * i + 1, 2 * j + 1);
        worst = std::max(worst, std::abs(block / 2.0 - coarse(i, j)));
      }
    c.require(worst <= 1e-12, spec.id() + " aggregation coherence <= 1e-12");
  }

  const auto a = discretize(CopulaSpec::clayton(1.0), 64);
  const auto b = discretize(CopulaSpec::gumbel(2.0), 64);
  const auto d = discretize(CopulaSpec::marshall_olkin(0.5, 0.5), 64);
  const double assoc =
      (fold(fold(a, b), d).entries() - fold(a, fold(b, d)).entries()).cwiseAbs().maxCoeff();
  c.require(assoc <= 1e-13, "fold associativity <= 1e-13");
  const double distrib = (fold(a, mix({{0.3, b}, {0.7, d}})).entries() -
                          mix({{0.3, fold(a, b)}, {0.7, fold(a, d)}}).entries())
                             .cwiseAbs()
                             .maxCoeff();
  c.require(distrib <= 1e-13, "fold distributivity over mix <= 1e-13");

  const Eigen::MatrixXd raw = detail::volumes_student_t(0.5, 3.0, 64);
  c.require(std::abs(raw.sum() - 1.0) <= 1e-8, "raw t volumes sum to 1 within 1e-8");
  const auto balanced = discretize(CopulaSpec::student_t(0.5, 3.0), 64);
  c.require(std::abs(balanced.entries().sum() / 64.0 - 1.0) <= 1e-12,
            "balanced t volumes sum to 1 within 1e-12");
  c.require(balanced.is_doubly_stochastic(1e-12), "balanced t doubly stochastic");
  c.note("assoc=" + fmt(assoc) + " distrib=" + fmt(distrib) + " raw_mass_err=" +
         fmt(std::abs(raw.sum() - 1.0)));
  return c;
}

// 12. Reproducibility: identical config + seed gives bitwise identical CSVs.
Check criterion12() {
  Check c;
  json cfg = {{"copula", {{"family", "clayton"}, {"theta", 1.0}}},
              {"grid", {{"m", 32}}},
              {"profile", {{"n_max", 8}}},
              {"simulate", {{"n", 5000}, {"seed", 424242}}},
              {"output", json::object()}};
  const fs::path dir1 = fs::temp_directory_path() / "copmix_accept_rep1";
  const fs::path dir2 = fs::temp_directory_path() / "copmix_accept_rep2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  cfg["output"]["directory"] = dir1.string();
  run_experiment(parse_experiment_config(cfg));
  cfg["output"]["directory"] = dir2.string();
  run_experiment(parse_experiment_config(cfg));
  for (const char* name : {"profile_m32.csv", "path_seed424242.csv"}) {
    const std::string x = slurp(dir1 / name), y = slurp(dir2 / name);
    c.require(!x.empty() && x == y, std::string(name) + " bitwise identical");
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"independence sanity", criterion1},
      {"Frechet-M degenerate chain", criterion2},
      {"closed-form mixture a*Pi+(1-a)*M", criterion3},
      {"geometric rho-mixing families", criterion4},
      {"mixture theorem rho bound", criterion5},
      {"decay inequalities on profiles", criterion6},
      {"Doeblin bound for Pi/Clayton mixtures", criterion7},
      {"Marshall-Olkin geometric phi decay", criterion8},
      {"Clayton beta_n decay", criterion9},
      {"grid vs simulation cross-check", criterion10},
      {"discretization algebra exactness", criterion11},
      {"bitwise reproducibility", criterion12}};

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    try {
      c = criteria[k].second();
    } catch (const std::exception& e) {
      c.pass = false;
      c.note(std::string("exception: ") + e.what());
    }
    if (!c.pass) ++failures;
    std::printf("[%s] criterion %zu: %s%s%s\n", c.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].first.c_str(), c.detail.empty() ? "" : " -- ",
                c.detail.c_str());
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
