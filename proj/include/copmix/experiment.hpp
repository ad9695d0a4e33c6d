#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "copmix/copula.hpp"
#include "copmix/errors.hpp"
#include "copmix/grid.hpp"
#include "copmix/mixing.hpp"
#include "copmix/simulate.hpp"

namespace copmix {

using nlohmann::json;

// Config rejection that names the offending field (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument("config field '" + field + "': " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

namespace detail {

inline double require_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

inline const json& require_key(const json& j, const std::string& key, const std::string& field) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(field, "missing");
  return j.at(key);
}

}  // namespace detail

// Copula description, e.g. {"family":"clayton","theta":1.0} or
// {"family":"mixture","components":[...],"weights":[...]}.
inline CopulaSpec copula_from_json(const json& j, const std::string& field = "copula") {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  const std::string family = j.value("family", "");
  try {
    if (family == "independence") return CopulaSpec::independence();
    if (family == "frechet_m") return CopulaSpec::frechet_m();
    if (family == "clayton")
      return CopulaSpec::clayton(
          detail::require_number(detail::require_key(j, "theta", field + ".theta"),
                                 field + ".theta"));
    if (family == "gumbel")
      return CopulaSpec::gumbel(detail::require_number(
          detail::require_key(j, "beta", field + ".beta"), field + ".beta"));
    if (family == "student_t")
      return CopulaSpec::student_t(
          detail::require_number(detail::require_key(j, "rho", field + ".rho"), field + ".rho"),
          detail::require_number(detail::require_key(j, "nu", field + ".nu"), field + ".nu"));
    if (family == "marshall_olkin")
      return CopulaSpec::marshall_olkin(
          detail::require_number(detail::require_key(j, "alpha", field + ".alpha"),
                                 field + ".alpha"),
          detail::require_number(detail::require_key(j, "beta", field + ".beta"),
                                 field + ".beta"));
    if (family == "mixture") {
      const json& comps = detail::require_key(j, "components", field + ".components");
      const json& weights = detail::require_key(j, "weights", field + ".weights");
      if (!comps.is_array() || !weights.is_array())
        throw ConfigError(field + ".components", "expected arrays");
      std::vector<CopulaSpec> parts;
      for (std::size_t k = 0; k < comps.size(); ++k)
        parts.push_back(
            copula_from_json(comps[k], field + ".components[" + std::to_string(k) + "]"));
      std::vector<double> w;
      for (const auto& x : weights) w.push_back(x.get<double>());
      return CopulaSpec::mixture(std::move(parts), std::move(w));
    }
  } catch (const OutOfRangeParameter& e) {
    throw ConfigError(field + "." + e.parameter(),
                      "out of range, allowed " + e.allowed_range());
  } catch (const BadWeights& e) {
    throw ConfigError(field + ".weights", e.what());
  }
  throw ConfigError(field + ".family", "unknown family '" + family + "'");
}

inline MarginalSpec marginal_from_json(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  const std::string kind = j.value("kind", "");
  try {
    if (kind == "uniform01") return MarginalSpec::uniform01();
    if (kind == "piecewise_linear")
      return MarginalSpec::piecewise_linear(j.at("x").get<std::vector<double>>(),
                                            j.at("cdf").get<std::vector<double>>());
    if (kind == "point_mass_mixture")
      return MarginalSpec::point_mass_mixture(
          j.at("atom_x").get<std::vector<double>>(), j.at("atom_w").get<std::vector<double>>(),
          j.value("x", std::vector<double>{}), j.value("cdf", std::vector<double>{}));
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field + ".kind", "unknown marginal kind '" + kind + "'");
}

struct GridConfig {
  int m = 64;
  std::optional<int> m2;  // second resolution for stability gaps
};

struct ProfileConfig {
  int n_max = 10;
};

struct SimulateConfig {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  MarginalSpec marginal = MarginalSpec::uniform01();
};

struct OutputConfig {
  std::filesystem::path directory = ".";
  bool csv = true;
  bool json_enabled = true;
};

struct ExperimentConfig {
  CopulaSpec copula = CopulaSpec::independence();
  GridConfig grid;
  std::optional<ProfileConfig> profile;
  bool doeblin_enabled = false;
  std::optional<SimulateConfig> simulate;
  OutputConfig output;
  json echo;  // original document, echoed into the report
};

inline OutputConfig parse_output_config(const json& j) {
  OutputConfig out;
  if (!j.contains("output")) return out;
  const json& o = j.at("output");
  if (o.contains("directory")) {
    if (!o.at("directory").is_string()) throw ConfigError("output.directory", "expected string");
    out.directory = o.at("directory").get<std::string>();
  }
  if (o.contains("formats")) {
    if (!o.at("formats").is_array()) throw ConfigError("output.formats", "expected array");
    out.csv = false;
    out.json_enabled = false;
    for (const auto& f : o.at("formats")) {
      const std::string name = f.get<std::string>();
      if (name == "csv")
        out.csv = true;
      else if (name == "json")
        out.json_enabled = true;
      else
        throw ConfigError("output.formats", "unknown format '" + name + "'");
    }
  }
  return out;
}

inline ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  cfg.echo = j;
  cfg.copula = copula_from_json(detail::require_key(j, "copula", "copula"));
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    cfg.grid.m = static_cast<int>(detail::require_number(detail::require_key(g, "m", "grid.m"),
                                                         "grid.m"));
    if (g.contains("m2")) cfg.grid.m2 = static_cast<int>(detail::require_number(g.at("m2"),
                                                                                "grid.m2"));
  }
  if (cfg.grid.m < 2 || cfg.grid.m > 4096) throw ConfigError("grid.m", "must be in [2,4096]");
  if (cfg.grid.m2 && (*cfg.grid.m2 < 2 || *cfg.grid.m2 > 4096))
    throw ConfigError("grid.m2", "must be in [2,4096]");
  if (j.contains("profile")) {
    ProfileConfig p;
    p.n_max = static_cast<int>(detail::require_number(
        detail::require_key(j.at("profile"), "n_max", "profile.n_max"), "profile.n_max"));
    if (p.n_max < 1 || p.n_max > 64) throw ConfigError("profile.n_max", "must be in [1,64]");
    cfg.profile = p;
  }
  if (j.contains("doeblin")) {
    const json& d = j.at("doeblin");
    if (!d.is_object() || !d.contains("enabled") || !d.at("enabled").is_boolean())
      throw ConfigError("doeblin.enabled", "expected boolean");
    cfg.doeblin_enabled = d.at("enabled").get<bool>();
  }
  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    SimulateConfig sim;
    const double n = detail::require_number(detail::require_key(s, "n", "simulate.n"),
                                            "simulate.n");
    if (n < 1 || n > 1e9) throw ConfigError("simulate.n", "must be in [1,1e9]");
    sim.n = static_cast<std::size_t>(n);
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned() && !s.at("seed").is_number_integer())
        throw ConfigError("simulate.seed", "expected integer");
      sim.seed = s.at("seed").get<std::uint64_t>();
    }
    sim.marginal = s.contains("marginal")
                       ? marginal_from_json(s.at("marginal"), "simulate.marginal")
                       : MarginalSpec::uniform01();
    cfg.simulate = sim;
  }
  cfg.output = parse_output_config(j);
  return cfg;
}

struct Verdict {
  std::string name;
  std::string status;  // pass | fail | not-applicable
  std::string detail;
};

struct RunReport {
  json document;
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;
  bool all_pass = true;
};

namespace detail {

class TaskTimer {
public:
  TaskTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

inline Verdict bounded_verdict(const std::string& name, double lhs, double rhs, double slack,
                               const std::string& detail) {
  return {name, lhs <= rhs + slack ? "pass" : "fail", detail};
}

}  // namespace detail

// Executes the enabled tasks, writes the CSV/JSON artifacts, and evaluates
// the inequality verdicts: beta <= phi, rho_n <= rho_1^n, rho <= 2 sqrt(phi),
// the mixture rho bound, and the Doeblin bound.
inline RunReport run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  RunReport report;
  std::error_code ec;
  fs::create_directories(cfg.output.directory, ec);
  if (!fs::exists(cfg.output.directory))
    throw ConfigError("output.directory", "cannot create '" + cfg.output.directory.string() +
                                              "'");
  json& doc = report.document;
  doc["config"] = cfg.echo.is_null() ? json::object() : cfg.echo;
  doc["spec_id"] = cfg.copula.id();
  {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    doc["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  }

  const auto write_artifact = [&](const std::string& name, const auto& writer) {
    const fs::path p = cfg.output.directory / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("output.directory", "cannot write " + p.string());
    writer(os);
    report.artifacts.push_back(p.string());
  };

  // ---- coeffs task (always on: every verdict needs the kernel) ----
  detail::TaskTimer coeffs_timer;
  std::vector<TransitionMatrix> component_matrices;
  std::optional<TransitionMatrix> kernel;
  if (cfg.copula.family() == Family::mixture) {
    std::vector<std::pair<double, TransitionMatrix>> parts;
    for (std::size_t k = 0; k < cfg.copula.components().size(); ++k) {
      component_matrices.push_back(discretize(cfg.copula.components()[k], cfg.grid.m));
      parts.emplace_back(cfg.copula.weights()[k], component_matrices.back());
    }
    kernel = mix(parts);
  } else {
    kernel = discretize(cfg.copula, cfg.grid.m);
  }
  const double beta1 = beta_coeff(*kernel);
  const double rho1 = rho_coeff(*kernel);
  const double phi1 = phi_coeff(*kernel);
  doc["tasks"]["coeffs"] = {{"m", cfg.grid.m},
                            {"beta1", beta1},
                            {"rho1", rho1},
                            {"phi1", phi1},
                            {"doubly_stochastic_error",
                             std::max(kernel->max_row_sum_error(), kernel->max_col_sum_error())}};
  if (cfg.grid.m2) {
    const TransitionMatrix k2 = discretize(cfg.copula, *cfg.grid.m2);
    const double rho1_b = rho_coeff(k2);
    doc["tasks"]["coeffs"]["stability"] = {{"m2", *cfg.grid.m2},
                                           {"rho1_m2", rho1_b},
                                           {"rho1_gap", std::abs(rho1 - rho1_b)},
                                           {"beta1_m2", beta_coeff(k2)},
                                           {"phi1_m2", phi_coeff(k2)}};
  }
  doc["tasks"]["coeffs"]["wall_seconds"] = coeffs_timer.seconds();

  // ---- profile task ----
  std::optional<MixingProfile> profile;
  if (cfg.profile) {
    detail::TaskTimer timer;
    profile = mixing_profile_from(*kernel, cfg.profile->n_max, cfg.copula.id());
    json jp = {{"n_max", cfg.profile->n_max},
               {"beta", profile->beta},
               {"rho", profile->rho},
               {"phi", profile->phi},
               {"rate_beta", profile->rate_beta},
               {"rate_rho", profile->rate_rho},
               {"rate_phi", profile->rate_phi},
               {"beta_nondecreasing", profile->beta_nondecreasing},
               {"rho_nondecreasing", profile->rho_nondecreasing},
               {"phi_nondecreasing", profile->phi_nondecreasing}};
    if (cfg.output.csv)
      write_artifact("profile_m" + std::to_string(cfg.grid.m) + ".csv",
                     [&](std::ostream& os) { write_profile_csv(os, *profile); });
    jp["wall_seconds"] = timer.seconds();
    doc["tasks"]["profile"] = std::move(jp);
  }

  // ---- doeblin task ----
  std::optional<DoeblinReport> doeblin;
  if (cfg.doeblin_enabled) {
    detail::TaskTimer timer;
    doeblin = doeblin_report_from(cfg.copula, *kernel);
    doc["tasks"]["doeblin"] = {{"m", doeblin->m},
                               {"density_floor", doeblin->density_floor},
                               {"epsilon", doeblin->epsilon},
                               {"phi_bound", doeblin->phi_bound},
                               {"grid_phi1", doeblin->grid_phi1},
                               {"applicable", doeblin->applicable},
                               {"wall_seconds", timer.seconds()}};
  }

  // ---- simulate task ----
  if (cfg.simulate) {
    detail::TaskTimer timer;
    const ChainPath path =
        sample_chain(cfg.copula, cfg.simulate->marginal, cfg.simulate->n, cfg.simulate->seed);
    json js = {{"n", cfg.simulate->n},
               {"seed", cfg.simulate->seed},
               {"marginal", path.marginal_id},
               {"generator", path.generator_id},
               {"first_value", path.values.front()},
               {"last_value", path.values.back()}};
    if (cfg.simulate->marginal.is_uniform())
      js["ks_uniform"] = ks_uniform_statistic(path.values);
    if (cfg.output.csv)
      write_artifact("path_seed" + std::to_string(cfg.simulate->seed) + ".csv",
                     [&](std::ostream& os) { write_path_csv(os, path); });
    js["wall_seconds"] = timer.seconds();
    doc["tasks"]["simulate"] = std::move(js);
  }

  // ---- verdicts ----
  const std::vector<double> betas = profile ? profile->beta : std::vector<double>{beta1};
  const std::vector<double> rhos = profile ? profile->rho : std::vector<double>{rho1};
  const std::vector<double> phis = profile ? profile->phi : std::vector<double>{phi1};
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < betas.size(); ++k) {
      worst = std::max(worst, betas[k] - phis[k]);
      ok = ok && betas[k] <= phis[k] + 1e-12;
    }
    report.verdicts.push_back({"beta_le_phi", ok ? "pass" : "fail",
                               "max(beta-phi)=" + detail::fmt_short(worst)});
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      const double bound = std::pow(rhos[0], static_cast<double>(k + 1));
      worst = std::max(worst, rhos[k] - bound);
      ok = ok && rhos[k] <= bound + 1e-9;
    }
    report.verdicts.push_back({"rho_le_rho1_pow", ok ? "pass" : "fail",
                               "max(rho_n-rho1^n)=" + detail::fmt_short(worst)});
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < rhos.size(); ++k) {
      const double bound = 2.0 * std::sqrt(phis[k]);
      worst = std::max(worst, rhos[k] - bound);
      ok = ok && rhos[k] <= bound + 1e-9;
    }
    report.verdicts.push_back({"rho_le_2sqrt_phi", ok ? "pass" : "fail",
                               "max(rho-2sqrt(phi))=" + detail::fmt_short(worst)});
  }
  if (cfg.copula.family() == Family::mixture) {
    double bound = 0.0;
    for (std::size_t k = 0; k < component_matrices.size(); ++k)
      bound += cfg.copula.weights()[k] * rho_coeff(component_matrices[k]);
    report.verdicts.push_back(detail::bounded_verdict(
        "mixture_rho_bound", rho1, bound, 1e-9,
        "rho(mix)=" + detail::fmt_short(rho1) + " bound=" + detail::fmt_short(bound)));
  } else {
    report.verdicts.push_back({"mixture_rho_bound", "not-applicable", "copula is not a mixture"});
  }
  if (doeblin && doeblin->applicable) {
    report.verdicts.push_back(detail::bounded_verdict(
        "doeblin_bound", doeblin->grid_phi1, doeblin->phi_bound, 1e-9,
        "grid_phi1=" + detail::fmt_short(doeblin->grid_phi1) +
            " bound=" + detail::fmt_short(doeblin->phi_bound)));
  } else {
    report.verdicts.push_back({"doeblin_bound", "not-applicable",
                               doeblin ? "absolutely continuous part vanishes"
                                       : "doeblin task not enabled"});
  }

  json jv = json::array();
  for (const auto& v : report.verdicts) {
    jv.push_back({{"name", v.name}, {"status", v.status}, {"detail", v.detail}});
    report.all_pass = report.all_pass && v.status != "fail";
  }
  doc["verdicts"] = std::move(jv);
  doc["artifacts"] = report.artifacts;

  if (cfg.output.json_enabled)
    write_artifact("report.json", [&](std::ostream& os) { os << doc.dump(2) << "\n"; });
  return report;
}

// ---- parameter sweeps: cartesian grids over theta, beta, mixture weight ----

struct SweepConfig {
  int m = 64;
  std::vector<double> theta;   // Clayton axis
  std::vector<double> beta;    // Gumbel axis
  std::vector<double> weight;  // Clayton share when both axes present
  OutputConfig output;
};

inline SweepConfig parse_sweep_config(const json& j) {
  if (!j.contains("sweep")) throw ConfigError("sweep", "missing");
  const json& s = j.at("sweep");
  SweepConfig cfg;
  if (s.contains("m"))
    cfg.m = static_cast<int>(detail::require_number(s.at("m"), "sweep.m"));
  if (cfg.m < 2 || cfg.m > 4096) throw ConfigError("sweep.m", "must be in [2,4096]");
  const auto axis = [&](const char* key) {
    std::vector<double> v;
    if (s.contains(key)) {
      if (!s.at(key).is_array()) throw ConfigError(std::string("sweep.") + key,
                                                   "expected array");
      v = s.at(key).get<std::vector<double>>();
      std::sort(v.begin(), v.end());
    }
    return v;
  };
  cfg.theta = axis("theta");
  cfg.beta = axis("beta");
  cfg.weight = axis("weight");
  if (cfg.theta.empty() && cfg.beta.empty())
    throw ConfigError("sweep", "needs a theta and/or beta axis");
  if (!cfg.weight.empty() && (cfg.theta.empty() || cfg.beta.empty()))
    throw ConfigError("sweep.weight", "weight axis needs both theta and beta axes");
  cfg.output = parse_output_config(j);
  return cfg;
}

// Rows are emitted in sorted parameter-tuple order, so the artifact is
// independent of evaluation order.
inline RunReport run_sweep(const SweepConfig& cfg) {
  namespace fs = std::filesystem;
  RunReport report;
  std::error_code ec;
  fs::create_directories(cfg.output.directory, ec);
  if (!fs::exists(cfg.output.directory))
    throw ConfigError("output.directory", "cannot create '" + cfg.output.directory.string() +
                                              "'");
  const bool both = !cfg.theta.empty() && !cfg.beta.empty();
  const std::vector<double> weights =
      both ? (cfg.weight.empty() ? std::vector<double>{0.5} : cfg.weight)
           : std::vector<double>{1.0};

  struct Row {
    std::vector<double> params;
    double beta1, rho1, phi1;
  };
  std::vector<Row> rows;
  const auto eval = [&](const CopulaSpec& spec, std::vector<double> params) {
    const TransitionMatrix p = discretize(spec, cfg.m);
    rows.push_back({std::move(params), beta_coeff(p), rho_coeff(p), phi_coeff(p)});
  };
  if (both) {
    for (double th : cfg.theta)
      for (double gb : cfg.beta)
        for (double w : weights)
          eval(CopulaSpec::mixture({CopulaSpec::clayton(th), CopulaSpec::gumbel(gb)},
                                   {w, 1.0 - w}),
               {th, gb, w});
  } else if (!cfg.theta.empty()) {
    for (double th : cfg.theta) eval(CopulaSpec::clayton(th), {th});
  } else {
    for (double gb : cfg.beta) eval(CopulaSpec::gumbel(gb), {gb});
  }

  std::string header;
  if (both)
    header = "theta,beta,weight";
  else if (!cfg.theta.empty())
    header = "theta";
  else
    header = "beta";
  header += ",beta1,rho1,phi1";

  detail::TaskTimer timer;
  if (cfg.output.csv) {
    const fs::path p = cfg.output.directory / "sweep.csv";
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("output.directory", "cannot write " + p.string());
    os << header << "\n";
    for (const auto& row : rows) {
      for (std::size_t k = 0; k < row.params.size(); ++k) {
        if (k) os << ',';
        os << detail::fmt_sig(row.params[k], 15);
      }
      os << ',' << detail::fmt_sig(row.beta1, 15) << ',' << detail::fmt_sig(row.rho1, 15) << ','
         << detail::fmt_sig(row.phi1, 15) << "\n";
    }
    report.artifacts.push_back(p.string());
  }

  json jrows = json::array();
  for (const auto& row : rows) {
    json r = {{"beta1", row.beta1}, {"rho1", row.rho1}, {"phi1", row.phi1}};
    if (both) {
      r["theta"] = row.params[0];
      r["beta"] = row.params[1];
      r["weight"] = row.params[2];
    } else if (!cfg.theta.empty()) {
      r["theta"] = row.params[0];
    } else {
      r["beta"] = row.params[0];
    }
    jrows.push_back(std::move(r));
  }
  report.document["tasks"]["sweep"] = {{"m", cfg.m},
                                       {"rows", std::move(jrows)},
                                       {"wall_seconds", timer.seconds()}};
  report.document["artifacts"] = report.artifacts;
  if (cfg.output.json_enabled) {
    const fs::path p = cfg.output.directory / "report.json";
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("output.directory", "cannot write " + p.string());
    os << report.document.dump(2) << "\n";
    report.artifacts.push_back(p.string());
  }
  return report;
}

// CLI exit codes: 0 all verdicts pass or not-applicable, 1 a verdict failed,
// 2 invalid config, 3 numerical failure.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalFailure*>(&e) || dynamic_cast<const NoConvergence*>(&e))
    return 3;
  return 2;
}

}  // namespace copmix
