#pragma once

// wsup command-line front end. run_cli is the whole program; main() only forwards to it.
//
// Exit codes: 0 ok, 1 tolerance check failed, 2 usage, 3 domain, 4 numerical.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsup/closed_forms.hpp"
#include "wsup/gaussian_sim.hpp"
#include "wsup/laplace.hpp"
#include "wsup/mc_estimator.hpp"
#include "wsup/pickands.hpp"
#include "wsup/tail_class.hpp"

#ifndef WSUP_VERSION
#define WSUP_VERSION "0.0.0"
#endif

namespace wsup::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTolerance = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr double kDefaultLaplaceTol = 0.05;
inline constexpr double kDefaultSlopeTol = 0.15;

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline std::vector<double> parse_u_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw usage_error("malformed u-grid entry '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size() || !std::isfinite(v)) throw usage_error("malformed u-grid entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw usage_error("empty u-grid");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw usage_error("u-grid must be strictly increasing");
  return out;
}

struct Args {
  // model
  std::string model = "fbm";
  double h = 0.5;
  double alpha_inf = 1.5;
  double d = 1.0;
  double nu = 1.0;
  double s = 1.0;
  std::optional<double> pickands;
  // horizon
  std::string horizon = "exp";
  double rate = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double shape = 1.0;
  double scale = 1.0;
  double t_fixed = 1.0;
  // laplace
  double alpha1 = 2.0, beta1 = 0.5, alpha2 = 2.0, beta2 = 0.5, gamma = 0.0;
  double tol = kDefaultLaplaceTol;
  double rel_tol = 1e-8;
  // monte carlo
  std::string u_grid = "1";
  std::size_t n_paths = 10000;
  std::size_t grid_n = 4096;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::string endpoint = "shared";
  double t_window = 10.0;
  double t_max = 1.0;
  std::string method = "ratio";
  // output
  std::string format = "json";
  std::string out_path;
};

class Emitter {
 public:
  Emitter(const Args& a, std::ostream& out) : args_(a), out_(out) {}

  void record(const std::string& command, const Json& params, const Json& fields) {
    Json r;
    r["version"] = WSUP_VERSION;
    r["command"] = command;
    r["params"] = params;
    if (params.contains("seed")) r["seed"] = params["seed"];
    if (params.contains("grid_n")) r["grid_n"] = params["grid_n"];
    for (const auto& [k, v] : fields.items()) r[k] = v;
    records_.push_back(std::move(r));
  }

  void flush() {
    std::ostringstream buf;
    if (args_.format == "csv")
      write_csv(buf);
    else
      for (const auto& r : records_) buf << r.dump() << '\n';
    if (args_.out_path.empty()) {
      out_ << buf.str();
      return;
    }
    std::filesystem::path p(args_.out_path);
    if (p.is_relative())
      if (const char* dir = std::getenv("WSUP_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot open output file " + p.string());
    f << buf.str();
  }

 private:
  static std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
      const auto str = v.get<std::string>();
      if (str.find_first_of(",\"\n") == std::string::npos) return str;
      std::string q = "\"";
      for (char ch : str) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
    if (v.is_number_float()) {
      std::ostringstream s;
      s.precision(17);
      s << v.get<double>();
      return s.str();
    }
    return v.dump();
  }

  // Flattens one level of nesting: {"params": {"h": ..}} -> column "params.h".
  static void flatten(const Json& r, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& cols) {
    for (const auto& [k, v] : r.items()) {
      if (v.is_object())
        flatten(v, prefix + k + ".", cols);
      else
        cols.emplace_back(prefix + k, cell(v));
    }
  }

  void write_csv(std::ostream& os) const {
    bool header = false;
    for (const auto& r : records_) {
      std::vector<std::pair<std::string, std::string>> cols;
      flatten(r, "", cols);
      if (!header) {
        for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].first;
        os << '\n';
        header = true;
      }
      for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].second;
      os << '\n';
    }
  }

  const Args& args_;
  std::ostream& out_;
  std::vector<Json> records_;
};

inline Json tail_json(const WeibullTailClass& w) {
  return Json{{"alpha", w.alpha()}, {"beta", w.beta()}, {"gamma", w.gamma()}, {"c", w.c()}};
}

inline Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline HorizonModel make_horizon(const Args& a) {
  if (a.model == "flm") return HorizonModel{FixedHorizon{a.s}};
  if (a.horizon == "exp") return HorizonModel{Exponential{a.rate}};
  if (a.horizon == "weibull") return HorizonModel{PureWeibull{a.alpha, a.beta}};
  if (a.horizon == "gamma") return HorizonModel{GammaLaw{a.shape, a.scale}};
  if (a.horizon == "fixed") return HorizonModel{FixedHorizon{a.t_fixed}};
  throw usage_error("unknown horizon '" + a.horizon + "'");
}

inline Json horizon_params(const Args& a) {
  if (a.model == "flm") return Json{{"horizon", "fixed"}, {"s", a.s}};
  if (a.horizon == "exp") return Json{{"horizon", "exp"}, {"rate", a.rate}};
  if (a.horizon == "weibull") return Json{{"horizon", "weibull"}, {"alpha", a.alpha}, {"beta", a.beta}};
  if (a.horizon == "gamma") return Json{{"horizon", "gamma"}, {"shape", a.shape}, {"scale", a.scale}};
  return Json{{"horizon", "fixed"}, {"t", a.t_fixed}};
}

inline ProcessKind make_kind(const Args& a) {
  if (a.model == "fbm") return Fbm{a.h};
  if (a.model == "ig") return IntegratedGaussian{a.alpha_inf};
  if (a.model == "flm") return Flm{a.h, a.nu};
  throw usage_error("unknown model '" + a.model + "'");
}

inline Json model_params(const Args& a) {
  Json p{{"model", a.model}};
  if (a.model == "fbm" || a.model == "flm") p["h"] = a.h;
  if (a.model == "ig" || a.model == "general") p["alpha_inf"] = a.alpha_inf;
  if (a.model == "general" || a.model == "ig") p["d"] = a.d;
  if (a.model == "flm") p["nu"] = a.nu;
  if (a.pickands) p["pickands"] = *a.pickands;
  const Json hp = horizon_params(a);
  for (const auto& [k, v] : hp.items()) p[k] = v;
  return p;
}

inline PickandsConfig pickands_config(const Args& a) {
  PickandsConfig c;
  c.n_paths = a.n_paths;
  c.grid_n = a.grid_n;
  c.seed = a.seed;
  c.threads = a.threads;
  return c;
}

/// H_H for H < 1/2: the pinned --pickands value or a Monte Carlo estimate (recorded in `meta`).
inline double resolve_pickands(const Args& a, Json& meta) {
  if (!(a.h < 0.5)) return std::numeric_limits<double>::quiet_NaN();
  if (a.pickands) return *a.pickands;
  const auto est = estimate_pickands(a.h, pickands_config(a));
  meta["pickands_estimate"] = est;
  return est.estimate;
}

struct SupClasses {
  std::optional<WeibullTailClass> tail;
  std::optional<WeibullTailClass> lower;
  std::optional<WeibullTailClass> upper;
  Json meta = Json::object();
};

inline SupClasses sup_classes(const Args& a) {
  SupClasses r;
  if (a.model == "flm") {
    const double pk = resolve_pickands(a, r.meta);
    const auto f = flm_sup_tail(a.h, a.s, a.nu, pk);
    r.tail = f.tail;
    r.lower = f.lower;
    r.upper = f.upper;
    r.meta["regime"] = f.regime == FlmRegime::exact ? "exact" : "bounds";
    r.meta["m_h"] = f.m_h;
    r.meta["m_h_displayed"] = m_h(a.h);
    r.meta["log_exponent"] = f.log_exponent;
    r.meta["extension"] = f.extension;
    return r;
  }
  const auto hz = make_horizon(a);
  if (a.model == "fbm") {
    const double pk = resolve_pickands(a, r.meta);
    if (const auto t = hz.tail())
      r.tail = sup_tail_fbm(a.h, *t, pk);
    else
      r.tail = scale(sup_fbm_unit_interval(a.h, pk), std::pow(a.t_fixed, a.h));
    return r;
  }
  const auto t = hz.tail();
  if (!t) throw domain_error("no Weibullian class for a fixed horizon with this model");
  std::vector<std::string> warnings;
  if (a.model == "ig") {
    r.tail = sup_tail_ig(a.d, a.alpha_inf, *t);
    r.meta["effective_d"] = ig_variance_coefficient(a.d, a.alpha_inf);
    if (!(t->alpha() < a.alpha_inf - 1.0))
      warnings.emplace_back("variance remainder is not o(t^{alpha_inf - alpha}) for this horizon");
  } else if (a.model == "general") {
    r.tail = sup_tail_general(VarianceModel::power_law(a.d, a.alpha_inf), *t, &warnings);
  } else {
    throw usage_error("unknown model '" + a.model + "'");
  }
  if (!warnings.empty()) r.meta["warnings"] = warnings;
  return r;
}

inline int cmd_tail_params(const Args& a, Emitter& em) {
  const auto c = sup_classes(a);
  Json fields;
  fields["tail"] = c.tail ? tail_json(*c.tail) : Json(nullptr);
  if (c.lower) fields["lower"] = tail_json(*c.lower);
  if (c.upper) fields["upper"] = tail_json(*c.upper);
  for (const auto& [k, v] : c.meta.items()) fields[k] = v;
  em.record("tail-params", model_params(a), fields);
  return kExitOk;
}

inline int cmd_laplace_check(const Args& a, Emitter& em) {
  const auto grid = parse_u_grid(a.u_grid);
  const LaplaceIntegralParams p{a.alpha1, a.beta1, a.alpha2, a.beta2, a.gamma};
  const auto cf = l1fed_closed_form(p);
  const Json params{{"alpha1", a.alpha1}, {"beta1", a.beta1}, {"alpha2", a.alpha2}, {"beta2", a.beta2},
                    {"gamma", a.gamma},   {"tol", a.tol},     {"rel_tol", a.rel_tol}};
  double last_ratio = std::numeric_limits<double>::quiet_NaN();
  for (double u : grid) {
    if (!(u > 0)) throw domain_error("laplace-check: u must be > 0");
    const auto o = l1fed_integral_oracle_log(p, u, a.rel_tol);
    const double log_cf = cf.log_value(u);
    last_ratio = std::exp(o.log_value - log_cf);
    em.record("laplace-check", params,
              Json{{"u", u},
                   {"oracle", std::exp(o.log_value)},
                   {"closed_form", std::exp(log_cf)},
                   {"log_oracle", o.log_value},
                   {"log_closed_form", log_cf},
                   {"ratio", last_ratio}});
  }
  return std::abs(last_ratio - 1.0) <= a.tol ? kExitOk : kExitTolerance;
}

inline McConfig mc_config(const Args& a) {
  McConfig c;
  c.n_paths = a.n_paths;
  c.grid_n = a.grid_n;
  c.seed = a.seed;
  c.threads = a.threads;
  if (a.endpoint == "exact")
    c.endpoint = EndpointMode::exact;
  else if (a.endpoint != "shared")
    throw usage_error("endpoint must be 'shared' or 'exact'");
  return c;
}

inline Json mc_params(const Args& a) {
  Json p = model_params(a);
  p["n_paths"] = a.n_paths;
  p["grid_n"] = a.grid_n;
  p["seed"] = a.seed;
  p["endpoint"] = a.endpoint;
  p["u_grid"] = a.u_grid;
  return p;
}

inline double class_value(const std::optional<WeibullTailClass>& w, double u) {
  return w && u > 0 ? w->tail_value(u) : std::numeric_limits<double>::quiet_NaN();
}

inline int cmd_compare(const Args& a, Emitter& em) {
  const auto grid = parse_u_grid(a.u_grid);
  const auto kind = make_kind(a);
  const auto hz = make_horizon(a);
  const auto cfg = mc_config(a);
  std::optional<SupClasses> classes;
  try {
    classes = sup_classes(a);
  } catch (const domain_error&) {
    // e.g. IG on a fixed horizon: MC columns only
  }
  const auto rows = estimate_tail_curve(kind, hz, grid, cfg);
  const Json params = mc_params(a);
  const auto* expo = std::get_if<Exponential>(&hz.family());
  const bool brownian_exp = a.model == "fbm" && a.h == 0.5 && expo;
  for (const auto& r : rows) {
    const double u = r.sup.u;
    const double asympt = classes ? class_value(classes->tail, u) : std::numeric_limits<double>::quiet_NaN();
    Json f{{"u", u},
           {"p_sup", r.sup.p_hat},
           {"sup_ci_low", r.sup.ci_low},
           {"sup_ci_high", r.sup.ci_high},
           {"sup_hits", r.sup.hits},
           {"p_sup_coarse", r.coarse_sup.p_hat},
           {"coarse_grid_n", r.coarse_sup.grid_n},
           {"p_end", r.endpoint.p_hat},
           {"end_ci_low", r.endpoint.ci_low},
           {"end_ci_high", r.endpoint.ci_high},
           {"end_hits", r.endpoint.hits},
           {"asympt", nullable(asympt)},
           {"lower", nullable(classes ? class_value(classes->lower, u) : NAN)},
           {"upper", nullable(classes ? class_value(classes->upper, u) : NAN)},
           {"exact", nullable(brownian_exp ? brownian_exp_exact(expo->rate, u) : NAN)},
           {"ratio_sup_end", nullable(r.endpoint.hits ? r.sup.p_hat / r.endpoint.p_hat : NAN)},
           {"ratio_sup_asympt", nullable(r.sup.p_hat / asympt)},
           {"below_resolution", r.sup.below_resolution}};
    em.record("compare", params, f);
  }
  return kExitOk;
}

inline int cmd_pickands(const Args& a, Emitter& em) {
  PickandsConfig c;
  c.t_window = a.t_window;
  c.grid_n = a.grid_n;
  c.n_paths = a.n_paths;
  c.seed = a.seed;
  c.threads = a.threads;
  if (a.method == "ratio")
    c.method = PickandsMethod::sup_integral_ratio;
  else if (a.method == "window")
    c.method = PickandsMethod::window_mean;
  else
    throw usage_error("method must be 'ratio' or 'window'");
  const auto e = estimate_pickands(a.h, c);
  const Json params{{"h", a.h},           {"t_window", a.t_window}, {"grid_n", e.grid_n},
                    {"n_paths", a.n_paths}, {"seed", a.seed},         {"method", to_string(c.method)}};
  Json fields = e;
  em.record("pickands", params, fields);
  return kExitOk;
}

inline int cmd_simulate(const Args& a, std::ostream& out) {
  const auto kind = make_kind(a);
  const auto path = simulate(ProcessModel{kind, {a.grid_n, a.t_max}}, a.seed);
  if (a.out_path.empty()) {
    write_csv(path, out);
    return kExitOk;
  }
  std::filesystem::path p(a.out_path);
  if (p.is_relative())
    if (const char* dir = std::getenv("WSUP_OUTPUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open output file " + p.string());
  write_csv(path, f);
  return kExitOk;
}

inline void add_model_options(CLI::App* c, Args& a) {
  c->add_option("--model", a.model, "fbm | ig | flm | general")
      ->check(CLI::IsMember({"fbm", "ig", "flm", "general"}));
  c->add_option("--h", a.h, "Hurst index");
  c->add_option("--alpha-inf", a.alpha_inf, "variance index alpha_inf in (1, 2)");
  c->add_option("--d", a.d, "variance (general) or covariance (ig) coefficient");
  c->add_option("--nu", a.nu, "gamma subordinator scale nu");
  c->add_option("--s", a.s, "fLm horizon S");
  c->add_option("--pickands", a.pickands, "pin the Pickands constant (H < 1/2)");
  c->add_option("--horizon", a.horizon, "exp | weibull | gamma | fixed")
      ->check(CLI::IsMember({"exp", "weibull", "gamma", "fixed"}));
  c->add_option("--rate", a.rate, "exponential rate");
  c->add_option("--alpha", a.alpha, "Weibull horizon alpha");
  c->add_option("--beta", a.beta, "Weibull horizon beta");
  c->add_option("--shape", a.shape, "gamma horizon shape");
  c->add_option("--scale", a.scale, "gamma horizon scale");
  c->add_option("--t", a.t_fixed, "fixed horizon length");
}

inline void add_mc_options(CLI::App* c, Args& a) {
  c->add_option("--n-paths", a.n_paths, "Monte Carlo paths")->check(CLI::PositiveNumber);
  c->add_option("--grid-n", a.grid_n, "grid points per path")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  c->add_option("--seed", a.seed, "master seed");
  c->add_option("--threads", a.threads, "worker threads (does not change results)")->check(CLI::PositiveNumber);
}

inline void add_output_options(CLI::App* c, Args& a) {
  c->add_option("--format", a.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  c->add_option("--out", a.out_path, "output file (relative paths resolve under $WSUP_OUTPUT_DIR)");
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Args a;
  CLI::App app{"Weibullian supremum tails: closed forms, quadrature oracles and Monte Carlo"};
  app.set_help_flag("--help", "print help");  // -h is taken by the Hurst index flag --h
  app.set_version_flag("--version", std::string(WSUP_VERSION));
  app.require_subcommand(1);

  auto* tp = app.add_subcommand("tail-params", "closed-form tail class of the supremum");
  add_model_options(tp, a);
  add_mc_options(tp, a);
  add_output_options(tp, a);

  auto* lc = app.add_subcommand("laplace-check", "quadrature vs closed-form Laplace asymptotics");
  lc->add_option("--alpha1", a.alpha1);
  lc->add_option("--beta1", a.beta1);
  lc->add_option("--alpha2", a.alpha2);
  lc->add_option("--beta2", a.beta2);
  lc->add_option("--gamma", a.gamma);
  lc->add_option("--u-grid", a.u_grid, "comma-separated increasing thresholds")->required();
  lc->add_option("--tol", a.tol, "tolerance on |final ratio - 1|");
  lc->add_option("--rel-tol", a.rel_tol, "quadrature relative tolerance");
  add_output_options(lc, a);

  auto* cmp = app.add_subcommand("compare", "Monte Carlo vs asymptotic tail over a u-grid");
  add_model_options(cmp, a);
  add_mc_options(cmp, a);
  add_output_options(cmp, a);
  cmp->add_option("--u-grid", a.u_grid, "comma-separated increasing thresholds")->required();
  cmp->add_option("--endpoint", a.endpoint, "shared | exact")->check(CLI::IsMember({"shared", "exact"}));

  auto* pk = app.add_subcommand("pickands", "Monte Carlo Pickands constant");
  pk->add_option("--h", a.h, "Hurst index")->required();
  pk->add_option("--t-window", a.t_window, "window half-length T");
  pk->add_option("--method", a.method, "ratio | window")->check(CLI::IsMember({"ratio", "window"}));
  add_mc_options(pk, a);
  add_output_options(pk, a);

  auto* sim = app.add_subcommand("simulate", "dump one path as CSV (t,value)");
  add_model_options(sim, a);
  sim->add_option("--grid-n", a.grid_n)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  sim->add_option("--t-max", a.t_max, "path length");
  sim->add_option("--seed", a.seed);
  sim->add_option("--out", a.out_path);

  // Pickands defaults differ from the tail-curve defaults.
  pk->preparse_callback([&a](std::size_t) {
    a.n_paths = 20000;
    a.grid_n = 16385;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    Emitter em(a, out);
    int code = kExitOk;
    if (*tp)
      code = cmd_tail_params(a, em);
    else if (*lc)
      code = cmd_laplace_check(a, em);
    else if (*cmp)
      code = cmd_compare(a, em);
    else if (*pk)
      code = cmd_pickands(a, em);
    else if (*sim)
      return cmd_simulate(a, out);
    em.flush();
    return code;
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const domain_error& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const convergence_error& e) {
    err << "numerical error: " << e.what() << " (best estimate " << e.best_estimate() << ", error "
        << e.error_estimate() << ")\n";
    return kExitNumerical;
  } catch (const simulation_error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const insufficient_data_error& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace wsup::cli
