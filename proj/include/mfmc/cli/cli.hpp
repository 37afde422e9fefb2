#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mfmc/asymptotics/asym_cov.hpp"
#include "mfmc/core/version.hpp"
#include "mfmc/estimators.hpp"
#include "mfmc/experiments.hpp"
#include "mfmc/io/csv.hpp"
#include "mfmc/io/json_io.hpp"
#include "mfmc/qoi/qoi.hpp"

namespace mfmc::cli {

struct ParamDef {
  std::string name;
  double fallback;
};

inline std::vector<ParamDef> model_params(ModelId id, CopulaId cop) {
  switch (id) {
    case ModelId::BivariateGaussian: return {{"mu1", 1.0}, {"var1", 2.0}, {"mu2", 0.0}, {"var2", 1.0}, {"rho", 0.8}};
    case ModelId::BivariateGumbel: return {{"mu1", 2.0}, {"sigma1", 4.0}, {"mu2", 2.0}, {"sigma2", 1.0}, {"r", 0.5}};
    case ModelId::BernoulliCopula:
      if (cop == CopulaId::Independence) return {{"p1", 0.5}, {"p2", 0.5}};
      return {{"p1", 0.5}, {"p2", 0.5}, {cop == CopulaId::Gaussian ? "rho" : "r", 0.5}};
    case ModelId::BernoulliMixture: return {{"p", 0.5}, {"a", 1.0}, {"b", 1.0}};
  }
  return {};
}

inline CopulaId parse_copula(const std::string& s) {
  for (CopulaId c : {CopulaId::Gaussian, CopulaId::GumbelHougaard, CopulaId::Independence})
    if (s == copula_name(c)) return c;
  fail(ErrorKind::Usage, "cli", "unknown copula '" + s + "'");
}

inline double parse_number(const std::string& s, const std::string& what) {
  auto v = parse_double(s);
  if (!v) fail(ErrorKind::Usage, "cli", what + " is not a number: '" + s + "'");
  return *v;
}

// --model, --copula, --param name=value and the --r / --rho shortcuts
struct ModelArgs {
  std::string model;
  std::string copula = "gaussian";
  std::vector<std::string> params;
  std::optional<double> r, rho;

  void attach(CLI::App* app, const std::string& default_model) {
    model = default_model;
    app->add_option("--model", model, "bivariate-gaussian | bivariate-gumbel | bernoulli-copula | bernoulli-mixture")
        ->capture_default_str();
    app->add_option("--copula", copula, "copula of the bernoulli-copula model")->capture_default_str();
    app->add_option("--param", params, "model parameter as name=value (repeatable)");
    app->add_option("--r", r, "shortcut for --param r=value");
    app->add_option("--rho", rho, "shortcut for --param rho=value");
  }

  bool given() const { return !params.empty() || r || rho; }

  JointModel build() const {
    ModelId id = parse_model(model);
    CopulaId cop = id == ModelId::BernoulliCopula ? parse_copula(copula) : CopulaId::Independence;
    std::vector<ParamDef> defs = model_params(id, cop);
    std::map<std::string, double> val;
    for (const auto& d : defs) val[d.name] = d.fallback;
    auto set = [&](const std::string& name, double v) {
      if (!val.count(name)) {
        std::string known;
        for (const auto& d : defs) known += (known.empty() ? "" : ", ") + d.name;
        fail(ErrorKind::Usage, "cli", "unknown parameter '" + name + "' for " + model + " (expected " + known + ")");
      }
      val[name] = v;
    };
    for (const auto& p : params) {
      auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorKind::Usage, "cli", "--param expects name=value, got '" + p + "'");
      set(std::string(trim(p.substr(0, eq))), parse_number(p.substr(eq + 1), "parameter " + p.substr(0, eq)));
    }
    if (r) set("r", *r);
    if (rho) set("rho", *rho);
    try {
      switch (id) {
        case ModelId::BivariateGaussian:
          return JointModel::bivariate_gaussian(val["mu1"], val["var1"], val["mu2"], val["var2"], val["rho"]);
        case ModelId::BivariateGumbel:
          return JointModel::bivariate_gumbel(val["mu1"], val["sigma1"], val["mu2"], val["sigma2"], val["r"]);
        case ModelId::BernoulliCopula:
          return JointModel::bernoulli_copula(val["p1"], val["p2"],
                                              Copula(cop, cop == CopulaId::Independence ? 0.0
                                                          : cop == CopulaId::Gaussian ? val["rho"]
                                                                                      : val["r"]));
        case ModelId::BernoulliMixture: return JointModel::bernoulli_mixture(val["p"], MixingDensity{val["a"], val["b"]});
      }
    } catch (const Error& e) {
      fail(ErrorKind::Usage, "cli", std::string("invalid model parameters: ") + e.what());
    }
    fail(ErrorKind::Usage, "cli", "unsupported model");
  }
};

inline json resolved_model(const JointModel& m) {
  json j = model_json(m);
  json p;
  std::vector<ParamDef> defs = model_params(m.id(), m.copula_id());
  for (int i = 0; i < m.size(); ++i) p[defs[i].name] = m.eta()(i);
  if (m.id() == ModelId::BernoulliMixture) {
    p["a"] = m.mixing().a;
    p["b"] = m.mixing().b;
  }
  j["params"] = p;
  return j;
}

// "lo:step:hi" or a comma list
inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> g;
  if (s.find(':') != std::string::npos) {
    std::string t = s;
    std::replace(t.begin(), t.end(), ':', ',');
    auto parts = split_csv_line(t);
    if (parts.size() != 3) fail(ErrorKind::Usage, "cli", "grid range must be lo:step:hi");
    double lo = parse_number(parts[0], "grid"), step = parse_number(parts[1], "grid"), hi = parse_number(parts[2], "grid");
    if (!(step > 0.0) || hi < lo) fail(ErrorKind::Usage, "cli", "grid range needs step > 0 and hi >= lo");
    return linear_grid(lo, hi, step);
  }
  for (const auto& p : split_csv_line(s)) g.push_back(parse_number(p, "grid"));
  if (g.empty()) fail(ErrorKind::Usage, "cli", "empty grid");
  return g;
}

inline void write_text(const std::string& path, const std::string& body) {
  auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Usage, "cli", "cannot write " + path);
  f << body;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Dataset, "cli", "cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline json interval_json(const std::string& label, double point, double var, double conf, Sided side) {
  Interval iv = normal_interval(point, var, conf, side);
  json j;
  j["label"] = label;
  j["estimate"] = point;
  j["std_error"] = std::sqrt(std::max(var, 0.0));
  j["lower"] = iv.lower;
  j["upper"] = iv.upper;
  return j;
}

struct FitArgs {
  std::string method;
  bool lofi_known = false;
  bool dependence_known = false;
  std::string coef = "plugin";
};

inline Estimate fit_method(const FitArgs& a, const MFDataset& ds, const JointModel& tmpl) {
  Method meth = parse_method(a.method);
  FamilyId fam = model_family(tmpl.id());
  MfOptions mo;
  if (a.coef == "true")
    mo.coef = CoefficientChoice::truth(tmpl);
  else if (a.coef != "plugin")
    fail(ErrorKind::Usage, "cli", "--coef must be plugin or true");
  if (a.lofi_known) mo.known_lofi = tmpl;
  if (tmpl.id() == ModelId::BernoulliMixture && meth != Method::BaselineMl && meth != Method::BaselineMoment &&
      meth != Method::MfmcMean)
    fail(ErrorKind::Usage, "cli", std::string(method_name(meth)) + " is not available for the mixture model");
  auto needs_gaussian = [&] {
    if (tmpl.id() != ModelId::BivariateGaussian)
      fail(ErrorKind::Usage, "cli", std::string(method_name(meth)) + " needs --model bivariate-gaussian");
  };
  switch (meth) {
    case Method::BaselineMl: return baseline_ml(ds.x1(), ds.paired_weights(), fam);
    case Method::BaselineMoment: {
      Estimate e = baseline_moment(ds.x1(), ds.paired_weights(), moment_map(fam));
      e.labels = family_labels(fam);
      return e;
    }
    case Method::MomentMf: return moment_mf(ds, fam, mo);
    case Method::MarginalMlMf: return marginal_ml_mf(ds, fam, mo);
    case Method::MfmcMean: return mfmc_mean(ds, mo);
    case Method::JointMl: {
      JointMlOptions o;
      o.theta2_known = a.lofi_known;
      o.dependence_known = a.dependence_known;
      return joint_ml(ds, tmpl, o);
    }
    case Method::JointMlClosed: needs_gaussian(); return gaussian_joint_ml_closed(ds);
    case Method::RegressionGaussian: needs_gaussian(); return regression_route_gaussian(ds).estimate;
  }
  fail(ErrorKind::Usage, "cli", "unsupported method");
}

inline json base_config(const std::string& command, const std::vector<std::string>& argv) {
  json j;
  j["command"] = command;
  j["version"] = version;
  j["argv"] = argv;
  return j;
}

inline void emit_json(const json& j, const std::string& out_path, std::ostream& out) {
  std::string body = j.dump(2) + "\n";
  if (out_path.empty())
    out << body;
  else
    write_text(out_path, body);
}

inline void emit_report(const ExperimentReport& rep, const std::string& dir, std::ostream& out) {
  for (const auto& f : rep.write(dir)) out << f << '\n';
}

// Parses and runs one invocation; returns the process exit status.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parametric multi-fidelity Monte Carlo estimation", "mfmc"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1, 1);

  std::string out_path, input, figure, grid, sided = "two", estimate_path;
  std::optional<std::uint64_t> seed;
  std::size_t n = 0, replications = 0;
  std::optional<std::size_t> m;
  double confidence = 0.95, kappa = 1.0;
  unsigned threads = 0;
  std::vector<std::string> methods;
  std::vector<double> exceedances, quantiles;
  bool location_only = false, true_coefficients = false, dependence_known = false;
  FitArgs fa;
  ModelArgs ma_fit, ma_asym, ma_curves, ma_sim, ma_val, ma_pipe;

  auto* fit = app.add_subcommand("fit", "run one estimator on a CSV dataset");
  fit->add_option("--input", input, "dataset CSV (x1,x2[,w])")->required();
  fit->add_option("--method", fa.method, "estimator name")->required();
  fit->add_option("--coef", fa.coef, "coefficient mode: plugin | true")->capture_default_str();
  fit->add_flag("--lofi-known", fa.lofi_known, "treat the model's low-fidelity law as known (m = infinity)");
  fit->add_flag("--dependence-known", fa.dependence_known, "hold the dependence parameter at the model value");
  fit->add_option("--confidence", confidence)->capture_default_str();
  fit->add_option("--sided", sided, "two | lower | upper")->capture_default_str();
  fit->add_option("--out", out_path, "output JSON (default stdout)");

  auto* asym = app.add_subcommand("asymvar", "model-true asymptotic covariance of estimators");
  asym->add_option("--method", methods, "estimator name (repeatable)")->required();
  asym->add_option("--kappa", kappa, "m/(n+m), 1 for known low-fidelity law")->capture_default_str();
  asym->add_flag("--location-only", location_only, "Gumbel with the scale known");
  asym->add_flag("--dependence-known", dependence_known);
  asym->add_option("--out", out_path, "output JSON (default stdout)");

  auto* curves = app.add_subcommand("curves", "variance-curve figures");
  curves->add_option("--figure", figure, "fig1 | fig2 | fig3 | fig5")->required();
  curves->add_option("--grid", grid, "lo:step:hi or a comma list");
  curves->add_option("--method", methods, "estimator name (repeatable)");
  curves->add_option("--seed", seed, "base seed (required for fig3)");
  curves->add_option("--out", out_path, "output directory")->required();

  auto* sim = app.add_subcommand("simulate", "sample a model to CSV");
  sim->add_option("--n", n, "paired rows")->required();
  sim->add_option("--m", m, "low-fidelity-only rows");
  sim->add_option("--seed", seed)->required();
  sim->add_option("--out", out_path, "output CSV (default stdout); a .json sidecar is written next to it");

  auto* val = app.add_subcommand("validate", "Monte Carlo check of the asymptotic variances");
  val->add_option("--n", n, "paired sample size")->capture_default_str();
  val->add_option("--m", m, "low-fidelity-only size; unset means known low-fidelity law");
  val->add_option("--replications", replications, "replications (>= 100)");
  val->add_option("--method", methods, "estimator name (repeatable)");
  val->add_option("--seed", seed)->required();
  val->add_flag("--true-coefficients", true_coefficients, "use model-optimal instead of plug-in coefficients");
  val->add_flag("--dependence-known", dependence_known);
  val->add_option("--threads", threads, "worker threads (0: MFMC_THREADS or all cores)");
  val->add_option("--out", out_path, "output directory")->required();

  auto* pipe = app.add_subcommand("pipeline", "margins, dependence, estimates and QoIs on one dataset");
  pipe->add_option("--input", input, "dataset CSV; synthetic data when omitted");
  pipe->add_option("--n", n, "synthetic paired size");
  pipe->add_option("--m", m, "synthetic low-fidelity-only size");
  pipe->add_option("--seed", seed, "seed for synthetic data");
  pipe->add_option("--exceedance", exceedances, "log10-exceedance level (repeatable)");
  pipe->add_option("--quantile", quantiles, "quantile probability (repeatable)");
  pipe->add_option("--confidence", confidence)->capture_default_str();
  pipe->add_option("--out", out_path, "output directory")->required();

  auto* qoi = app.add_subcommand("qoi", "quantities of interest from an estimate file");
  qoi->add_option("--estimate", estimate_path, "estimate JSON written by fit")->required();
  qoi->add_option("--exceedance", exceedances, "log10-exceedance level (repeatable)");
  qoi->add_option("--quantile", quantiles, "quantile probability (repeatable)");
  qoi->add_option("--confidence", confidence)->capture_default_str();
  qoi->add_option("--sided", sided, "two | lower | upper")->capture_default_str();
  qoi->add_option("--out", out_path, "output JSON (default stdout)");

  ma_fit.attach(fit, "bivariate-gumbel");
  ma_asym.attach(asym, "bivariate-gumbel");
  ma_curves.attach(curves, "bivariate-gumbel");
  ma_sim.attach(sim, "bivariate-gumbel");
  ma_val.attach(val, "bivariate-gaussian");
  ma_pipe.attach(pipe, "bivariate-gumbel");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json(Error(ErrorKind::Usage, "cli", e.what())).dump() << '\n';
    return 2;
  }

  try {
    auto qoi_list = [&] {
      std::vector<QoISpec> q;
      for (double a : exceedances) q.push_back(QoISpec::exceedance(a));
      for (double p : quantiles) q.push_back(QoISpec::quantile(p));
      return q;
    };
    std::vector<Method> meths;
    for (const auto& s : methods) meths.push_back(parse_method(s));

    if (fit->parsed()) {
      JointModel tmpl = ma_fit.build();
      MFDataset ds = load_dataset(input);
      Sided side = parse_sided(sided);
      Estimate e = fit_method(fa, ds, tmpl);
      json cfg = base_config("fit", args);
      cfg["input"] = input;
      cfg["method"] = fa.method;
      cfg["model"] = resolved_model(tmpl);
      cfg["coef"] = fa.coef;
      cfg["lofi_known"] = fa.lofi_known;
      cfg["dependence_known"] = fa.dependence_known;
      cfg["confidence"] = confidence;
      cfg["sided"] = sided_name(side);
      json iv = json::array();
      for (int l = 0; l < e.theta1.size(); ++l)
        iv.push_back(interval_json(l < static_cast<int>(e.labels.size()) ? e.labels[l] : std::to_string(l), e.theta1(l),
                                   e.sigma(l, l) / static_cast<double>(e.n), confidence, side));
      emit_json({{"config", cfg}, {"estimate", to_json(e)}, {"intervals", iv}}, out_path, out);
      return 0;
    }
    if (asym->parsed()) {
      JointModel model = ma_asym.build();
      AsymOptions o;
      o.kappa = kappa;
      o.location_only = location_only;
      o.dependence_known = dependence_known;
      json cfg = base_config("asymvar", args);
      cfg["model"] = resolved_model(model);
      cfg["kappa"] = kappa;
      cfg["location_only"] = location_only;
      cfg["dependence_known"] = dependence_known;
      json res = json::array();
      for (Method mt : meths) {
        Eigen::MatrixXd s = asym_cov(mt, model, o);
        json r;
        r["method"] = method_name(mt);
        r["sigma"] = to_json(s);
        res.push_back(r);
      }
      emit_json({{"config", cfg}, {"results", res}}, out_path, out);
      return 0;
    }
    if (curves->parsed()) {
      ExperimentConfig c;
      c.id = parse_experiment(figure);
      if (c.id == ExperimentId::McValidate || c.id == ExperimentId::Pipeline)
        fail(ErrorKind::Usage, "cli", "curves takes fig1, fig2, fig3 or fig5");
      if (c.id == ExperimentId::Fig3 && !seed) fail(ErrorKind::Usage, "cli", "fig3 samples copula pairs and needs --seed");
      c.seed = seed.value_or(0);
      if (!grid.empty()) c.grid = parse_grid(grid);
      c.methods = meths;
      if (ma_curves.given() || ma_curves.model != "bivariate-gumbel") c.model = ma_curves.build();
      emit_report(run_figure(c), out_path, out);
      return 0;
    }
    if (sim->parsed()) {
      JointModel model = ma_sim.build();
      RngStream rng(*seed);
      const std::size_t mm = m.value_or(0);
      auto s = model.sample(n + mm, rng);
      std::ostringstream csv;
      csv << "x1,x2\n";
      for (std::size_t i = 0; i < n; ++i) csv << format_double(s[i].first) << ',' << format_double(s[i].second) << '\n';
      for (std::size_t j = n; j < n + mm; ++j) csv << ',' << format_double(s[j].second) << '\n';
      if (out_path.empty()) {
        out << csv.str();
      } else {
        write_text(out_path, csv.str());
        json cfg = base_config("simulate", args);
        cfg["model"] = resolved_model(model);
        cfg["n"] = n;
        cfg["m"] = mm;
        cfg["seed"] = *seed;
        write_text(out_path + ".json", json{{"config", cfg}}.dump(2) + "\n");
      }
      return 0;
    }
    if (val->parsed()) {
      ExperimentConfig c;
      c.id = ExperimentId::McValidate;
      c.seed = seed;
      c.model = ma_val.build();
      c.n = n;
      c.replications = replications;
      if (m) {
        c.m = m;
        c.known_lofi = false;
      }
      c.methods = meths;
      c.true_coefficients = true_coefficients;
      c.dependence_known = dependence_known;
      c.threads = threads;
      emit_report(run_mc_validation(c), out_path, out);
      return 0;
    }
    if (pipe->parsed()) {
      ExperimentConfig c;
      c.id = ExperimentId::Pipeline;
      c.seed = seed;
      c.model = ma_pipe.build();
      c.n = n;
      c.m = m;
      c.dataset_path = input;
      c.qois = qoi_list();
      c.confidence = confidence;
      if (input.empty() && !seed) fail(ErrorKind::Usage, "cli", "synthetic pipeline data needs --seed");
      emit_report(run_pipeline(c), out_path, out);
      return 0;
    }
    if (qoi->parsed()) {
      json j;
      try {
        j = json::parse(read_text(estimate_path));
      } catch (const json::exception& x) {
        fail(ErrorKind::Parse, "cli", estimate_path + ": " + x.what());
      }
      Estimate e = estimate_from_json(j.contains("estimate") ? j["estimate"] : j);
      std::vector<QoISpec> qs = qoi_list();
      if (qs.empty()) fail(ErrorKind::Usage, "cli", "give at least one --exceedance or --quantile");
      Sided side = parse_sided(sided);
      json cfg = base_config("qoi", args);
      cfg["estimate"] = estimate_path;
      json ql = json::array();
      for (const auto& q : qs) ql.push_back(qoi_json(q));
      cfg["qois"] = ql;
      cfg["confidence"] = confidence;
      cfg["sided"] = sided_name(side);
      json res = json::array();
      for (const auto& q : qs) {
        QoIResult r = qoi_estimate(q, e, confidence, side);
        json rj;
        rj["label"] = r.label;
        rj["estimate"] = r.point;
        rj["variance"] = r.variance;
        rj["lower"] = r.interval.lower;
        rj["upper"] = r.interval.upper;
        rj["warnings"] = r.warnings;
        res.push_back(rj);
      }
      emit_json({{"config", cfg}, {"method", method_name(e.method)}, {"results", res}}, out_path, out);
      return 0;
    }
    fail(ErrorKind::Usage, "cli", "no subcommand");
  } catch (const Error& e) {
    err << error_json(e).dump() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << error_json(Error(ErrorKind::NumericalDomain, "cli", e.what())).dump() << '\n';
    return 4;
  }
}

}  // namespace mfmc::cli
