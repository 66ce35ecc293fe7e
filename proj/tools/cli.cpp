#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <locale>
#include <map>
#include <set>
#include <sstream>

#include "minnorm/config.hpp"
#include "minnorm/covariate_shift.hpp"
#include "minnorm/csv.hpp"
#include "minnorm/errors.hpp"
#include "minnorm/experiment.hpp"
#include "minnorm/model_shift.hpp"
#include "minnorm/snr_estimation.hpp"

namespace minnorm::cli {

namespace {

// Merged parameters: config file first, command-line flags on top.
class Params {
 public:
  Params(KeyValues kv, std::set<std::string> allowed) : kv_(std::move(kv)) {
    for (const auto& [k, v] : kv_)
      if (!allowed.count(k)) throw InputError("unknown key '" + k + "' for this command");
  }

  bool has(const std::string& k) const { return kv_.count(k) > 0; }
  std::string str(const std::string& k, const std::string& dflt = "") const {
    auto it = kv_.find(k);
    return it == kv_.end() ? dflt : it->second;
  }
  std::string required(const std::string& k) const {
    if (!has(k)) throw InputError("missing required parameter --" + flag(k));
    return kv_.at(k);
  }
  double num(const std::string& k, double dflt) const {
    return has(k) ? parse_double(k, kv_.at(k)) : dflt;
  }
  double num(const std::string& k) const { return parse_double(k, required(k)); }
  Index count(const std::string& k, Index dflt) const {
    return has(k) ? static_cast<Index>(parse_integer(k, kv_.at(k))) : dflt;
  }
  Index count(const std::string& k) const {
    return static_cast<Index>(parse_integer(k, required(k)));
  }
  bool flag_set(const std::string& k) const { return has(k) && parse_bool(k, kv_.at(k)); }

  static std::string flag(std::string k) {
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
  }

 private:
  KeyValues kv_;
};

struct Formatter {
  int precision = 4;
  std::string operator()(double x) const {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::fixed << std::setprecision(precision) << (x == 0 ? 0.0 : x);
    return os.str();
  }
};

std::string risk_line(const RiskBreakdown& r, const Formatter& f) {
  return "V=" + f(r.variance) + " B1=" + f(r.b1) + " B2=" + f(r.b2) + " B3=" + f(r.b3) +
         " total=" + f(r.total());
}

JointSpectrum spectrum_from(const Params& p) {
  if (p.has("spectrum")) return read_spectrum_csv(p.str("spectrum"));
  if (p.has("kappa")) return JointSpectrum::reciprocal_pair(p.num("kappa"));
  return JointSpectrum::isotropic();
}

// key, help, is_flag
struct OptionSpec {
  const char* key;
  const char* help;
  bool is_flag = false;
};

const std::vector<OptionSpec> kTheoryOptions = {
    {"design", "model-shift | target-only | ridge-model-shift | multi-source | "
               "covariate-shift | target-only-anisotropic"},
    {"p", "dimension"},
    {"n1", "source sample size"},
    {"n2", "target sample size"},
    {"snr", "signal-to-noise ratio ||beta2||^2 / sigma^2"},
    {"ssr", "shift-to-signal ratio ||beta1 - beta2||^2 / ||beta2||^2"},
    {"sigma_sq", "noise variance (default 1)"},
    {"lambda", "ridge penalty"},
    {"cross", "cross term (beta1 - beta2)^T beta2 for ridge model shift (default 0)"},
    {"sources", "multi-source blocks n:ssr,n:ssr,..."},
    {"spectrum", "spectrum CSV with columns lam1,lam2,weight"},
    {"kappa", "reciprocal-pair spectrum {kappa, 1/kappa} when no spectrum file is given"},
    {"precision", "decimals printed (default 4)"},
};

const std::vector<OptionSpec> kSimulateOptions = {
    {"design", "model_shift | covariate_shift"},
    {"p", "dimension"},
    {"n2", "target sample size"},
    {"n1_grid", "source sizes, a,b,c or start:stop:step"},
    {"snr", "signal-to-noise ratio"},
    {"ssr", "shift-to-signal ratio (model shift)"},
    {"kappa", "eigenvalue ratio of Sigma1 (covariate shift)"},
    {"sigma_sq", "noise variance"},
    {"reps", "noise replicates per grid point"},
    {"raw_fig2_scaling", "covariate shift: draw beta2 entries without the 1/p scaling", true},
};

const std::vector<OptionSpec> kDecideOptions = {
    {"snr", "signal-to-noise ratio"},
    {"ssr", "shift-to-signal ratio"},
    {"n1", "source sample size"},
    {"n2", "target sample size"},
    {"p", "dimension"},
    {"source", "source CSV (features..., y); estimates SNR/SSR from data"},
    {"target", "target CSV (features..., y)"},
    {"lambda_l", "Lasso penalty scale (default 1)"},
    {"centered", "use the centered variance of y2", true},
    {"precision", "decimals printed (default 4)"},
};

const std::vector<OptionSpec> kEstimateOptions = {
    {"source", "source CSV (features..., y)"},
    {"target", "target CSV (features..., y)"},
    {"lambda_l", "Lasso penalty scale (default 1)"},
    {"tol", "coordinate-descent tolerance (default 1e-8)"},
    {"max_sweeps", "coordinate-descent sweep cap (default 10000)"},
    {"centered", "use the centered variance of y2", true},
    {"precision", "decimals printed (default 4)"},
};

const std::vector<OptionSpec> kSolveOptions = {
    {"spectrum", "spectrum CSV with columns lam1,lam2,weight"},
    {"kappa", "reciprocal-pair spectrum when no file is given"},
    {"n1", "source sample size"},
    {"n2", "target sample size"},
    {"p", "dimension"},
    {"lambda", "ridge penalty (default 0: interpolator limit)"},
    {"tol", "residual tolerance (default 1e-12)"},
    {"precision", "decimals printed (default 4)"},
};

std::set<std::string> keys_of(const std::vector<OptionSpec>& specs) {
  std::set<std::string> s;
  for (const auto& o : specs) s.insert(o.key);
  s.insert("seed");
  s.insert("threads");
  return s;
}

Formatter formatter(const Params& p) {
  Formatter f;
  f.precision = static_cast<int>(p.count("precision", 4));
  if (f.precision < 0 || f.precision > 17) throw InputError("precision must be in [0, 17]");
  return f;
}

int cmd_theory(const Params& p, std::ostream& out) {
  const Formatter f = formatter(p);
  const std::string design = p.str("design", "model-shift");
  const double sigma_sq = p.num("sigma_sq", 1.0);

  if (design == "model-shift" || design == "model_shift") {
    const auto s = ShiftSummary::from_ratios(p.count("n1"), p.count("n2"), p.count("p"),
                                             p.num("snr"), p.num("ssr", 0.0), sigma_sq);
    out << risk_line(theory_min_norm_model_shift(s), f) << "\n";
    if (s.p > s.n2)
      out << "target_only="
          << f(theory_target_only_isotropic(s.n2, s.p, sigma_sq, s.beta2_norm_sq)) << "\n";
  } else if (design == "target-only" || design == "target_only") {
    const double b = p.num("snr") * sigma_sq;
    out << "total=" << f(theory_target_only_isotropic(p.count("n2"), p.count("p"), sigma_sq, b))
        << "\n";
  } else if (design == "ridge-model-shift" || design == "ridge_model_shift") {
    auto s = ShiftSummary::from_ratios(p.count("n1"), p.count("n2"), p.count("p"), p.num("snr"),
                                       p.num("ssr", 0.0), sigma_sq);
    s.cross_term = p.num("cross", 0.0);
    const auto [r, q] = theory_ridge_model_shift(s, p.num("lambda"));
    out << risk_line(r, f) << "\n";
    out << "m=" << f(q.m) << " m_prime=" << f(q.m_prime) << " f1=" << f(q.f1)
        << " f2=" << f(q.f2) << " f3=" << f(q.f3) << " alpha=" << f(q.alpha) << " s=" << f(q.s)
        << "\n";
  } else if (design == "multi-source" || design == "multi_source") {
    const double b = p.num("snr") * sigma_sq;
    std::vector<SourceBlock> blocks;
    for (const auto& item : split_csv_line(p.required("sources"))) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw InputError("sources entries must be n:ssr");
      blocks.push_back({static_cast<Index>(parse_integer("sources", item.substr(0, colon))),
                        parse_double("sources", item.substr(colon + 1)) * b});
    }
    out << risk_line(theory_multi_source(blocks, p.count("n2"), p.count("p"), sigma_sq, b), f)
        << "\n";
  } else if (design == "covariate-shift" || design == "covariate_shift") {
    const JointSpectrum H = spectrum_from(p);
    const SignalSpectrum G = SignalSpectrum::aligned_with(H);
    const double b = p.num("snr") * sigma_sq;
    const double lambda = p.num("lambda", 0.0);
    if (lambda > 0) {
      const auto [r, sol] = solve_ridge_covariate(H, G, p.count("n1"), p.count("n2"),
                                                  p.count("p"), sigma_sq, b, lambda);
      out << risk_line(r, f) << "\n";
    } else {
      out << risk_line(risk_covariate_shift(H, G, p.count("n1"), p.count("n2"), p.count("p"),
                                            sigma_sq, b),
                       f)
          << "\n";
    }
  } else if (design == "target-only-anisotropic" || design == "target_only_anisotropic") {
    const JointSpectrum H = spectrum_from(p);
    const double b = p.num("snr") * sigma_sq;
    const auto r = theory_target_only_anisotropic(H, SignalSpectrum::aligned_with(H),
                                                  p.count("n2"), p.count("p"), sigma_sq, b);
    out << "total=" << f(r.risk) << " c0=" << f(r.c0) << " gamma_star=" << f(r.gamma_star)
        << " (gamma_star = p/n2)\n";
  } else {
    throw InputError("unknown theory design '" + design + "'");
  }
  return 0;
}

int cmd_simulate(const Params& p, const KeyValues& merged, const std::string& out_path,
                 std::ostream& out, std::ostream& err) {
  (void)p;
  ExperimentConfig cfg;
  cfg.n1_grid = {0};
  apply_experiment_keys(cfg, merged);
  const auto rows = run_sweep(cfg);
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  write_results_csv(csv, cfg, rows);
  if (out_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InputError("cannot write " + out_path);
    f << csv.str();
  }
  for (const auto& row : rows)
    if (row.failed) err << "warning: grid point n1=" << row.n1 << " failed: " << row.error << "\n";
  return 0;
}

int cmd_decide(const Params& p, std::ostream& out) {
  const Formatter f = formatter(p);
  auto print = [&](const TransferDecision& d, const OptimalTargetSize& o, double snr, double ssr,
                   Index n1, Index pp) {
    out << "recommendation=" << to_string(d.recommendation) << " regime=" << to_string(d.regime)
        << " snr_threshold=" << f(d.snr_threshold);
    if (d.rho) out << " rho=" << f(*d.rho);
    out << "\n" << optimal_target_size_report(o, snr, ssr, n1, pp);
  };
  if (p.has("source") || p.has("target")) {
    DatasetPair data;
    read_regression_csv(p.required("source"), data.X1, data.y1);
    read_regression_csv(p.required("target"), data.X2, data.y2);
    SnrOptions opts;
    opts.lasso.lambda_L = p.num("lambda_l", 1.0);
    opts.centered_variance = p.flag_set("centered");
    const auto res = decide_from_data(data, opts);
    out << "snr_hat=" << f(res.report.snr_hat) << " ssr_hat=" << f(res.report.ssr_hat) << "\n";
    print(res.decision, res.target_size, res.report.snr_hat, res.report.ssr_hat, data.n1(),
          data.p());
    return 0;
  }
  const double snr = p.num("snr"), ssr = p.num("ssr");
  const Index n1 = p.count("n1"), n2 = p.count("n2"), pp = p.count("p");
  print(decide_transfer(snr, ssr, n1, n2, pp), optimal_target_size(snr, ssr, n1, pp), snr, ssr,
        n1, pp);
  return 0;
}

int cmd_estimate(const Params& p, std::ostream& out) {
  const Formatter f = formatter(p);
  DatasetPair data;
  read_regression_csv(p.required("source"), data.X1, data.y1);
  read_regression_csv(p.required("target"), data.X2, data.y2);
  SnrOptions opts;
  opts.lasso.lambda_L = p.num("lambda_l", 1.0);
  opts.lasso.tol = p.num("tol", 1e-8);
  opts.lasso.max_sweeps = static_cast<std::size_t>(p.count("max_sweeps", 10000));
  opts.centered_variance = p.flag_set("centered");
  const SnrReport r = estimate_snr_ssr(data, opts);
  out << "snr_hat=" << f(r.snr_hat) << " ssr_hat=" << f(r.ssr_hat)
      << " sigma_sq_hat=" << f(r.sigma_sq_hat) << " source_signal=" << f(r.beta_norm_hats[0])
      << " target_signal=" << f(r.beta_norm_hats[1]) << " shift=" << f(r.shift_norm_hat) << "\n";
  out << "clamped: source_signal=" << r.clamped.source_signal
      << " target_signal=" << r.clamped.target_signal << " noise=" << r.clamped.noise
      << " shift=" << r.clamped.shift << "\n";
  out << "support: source=" << r.fits[0].support_size << " target=" << r.fits[1].support_size
      << " (Lasso loss scaled by 1/(2 n_k); Var(y2) "
      << (opts.centered_variance ? "centered" : "uncentered") << ")\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  return 0;
}

int cmd_solve(const Params& p, std::ostream& out) {
  const Formatter f = formatter(p);
  if (!p.has("spectrum") && !p.has("kappa"))
    throw InputError("missing required parameter --spectrum");
  const JointSpectrum H = spectrum_from(p);
  SolverSettings cfg;
  cfg.tol = p.num("tol", cfg.tol);
  const double lambda = p.num("lambda", 0.0);
  const Index n1 = p.count("n1"), n2 = p.count("n2"), pp = p.count("p");
  CovariateSolution sol;
  if (lambda > 0) {
    sol = solve_ridge_covariate(H, SignalSpectrum::aligned_with(H), n1, n2, pp, 1.0, 1.0, lambda,
                                cfg)
              .second;
  } else {
    sol = solve_covariate_interpolator(H, n1, n2, pp, cfg);
  }
  out << "a1=" << f(sol.a[0]) << " a2=" << f(sol.a[1]) << " a3=" << f(sol.a[2])
      << " a4=" << f(sol.a[3]) << "\n";
  out << "b1=" << f(sol.b[0]) << " b2=" << f(sol.b[1]) << " b3=" << f(sol.b[2])
      << " b4=" << f(sol.b[3]) << "\n";
  std::ostringstream res;
  res.imbue(std::locale::classic());
  res << std::setprecision(3) << sol.residual_norm;
  out << "lambda=" << format_number(sol.lambda) << " residual=" << res.str() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pooled min-norm interpolation under transfer: risk theory, simulation, "
               "estimation",
               "minnorm"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_path;
  KeyValues flags;
  app.add_option("--config", config_path, "key = value parameter file");
  app.add_option("--out", out_path, "write output to this file instead of stdout");
  app.add_option_function<std::string>(
      "--seed", [&](const std::string& v) { flags["seed"] = v; }, "master RNG seed");
  app.add_option_function<std::string>(
      "--threads", [&](const std::string& v) { flags["threads"] = v; },
      "worker threads (0 = INTERP_RISK_THREADS or hardware)");

  struct Sub {
    CLI::App* app;
    const std::vector<OptionSpec>* specs;
  };
  std::map<std::string, Sub> subs;
  auto add_sub = [&](const std::string& name, const std::string& help,
                     const std::vector<OptionSpec>& specs) {
    CLI::App* s = app.add_subcommand(name, help);
    for (const auto& o : specs) {
      const std::string key = o.key;
      const std::string flag = "--" + Params::flag(key);
      if (o.is_flag)
        s->add_flag_callback(flag, [&flags, key] { flags[key] = "true"; }, o.help);
      else
        s->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags[key] = v; }, o.help);
    }
    subs[name] = {s, &specs};
  };
  add_sub("theory", "evaluate a closed-form risk formula", kTheoryOptions);
  add_sub("simulate", "run a Monte-Carlo sweep and write CSV", kSimulateOptions);
  add_sub("decide", "transfer decision and optimal target size", kDecideOptions);
  add_sub("estimate", "estimate SNR and SSR from CSV data", kEstimateOptions);
  add_sub("solve", "solve the covariate-shift self-consistent system", kSolveOptions);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    KeyValues merged;
    if (!config_path.empty()) merged = load_key_values(config_path);
    for (const auto& [k, v] : flags) merged[k] = v;

    std::string name;
    const std::vector<OptionSpec>* specs = nullptr;
    for (const auto& [n, s] : subs)
      if (s.app->parsed()) {
        name = n;
        specs = s.specs;
      }
    const Params params(merged, keys_of(*specs));

    std::ostringstream text;
    text.imbue(std::locale::classic());
    int code = 0;
    if (name == "simulate") return cmd_simulate(params, merged, out_path, out, err);
    if (name == "theory") code = cmd_theory(params, text);
    else if (name == "decide") code = cmd_decide(params, text);
    else if (name == "estimate") code = cmd_estimate(params, text);
    else if (name == "solve") code = cmd_solve(params, text);

    if (out_path.empty()) {
      out << text.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw InputError("cannot write " + out_path);
      f << text.str();
    }
    return code;
  } catch (const EstimateUndefinedError& e) {
    err << "error: " << e.what() << "\n  diagnostics: " << e.diagnostics() << "\n";
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    err << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace minnorm::cli
