#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "mfmc/asymptotics/asym_cov.hpp"
#include "mfmc/experiments/config.hpp"
#include "mfmc/experiments/parallel.hpp"
#include "mfmc/experiments/report.hpp"
#include "mfmc/models/copula.hpp"

namespace mfmc {

// lo, lo + step, ..., hi with the endpoint hit exactly
inline std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const long k = std::lround((hi - lo) / step);
  for (long i = 0; i <= k; ++i) g.push_back(i == k ? hi : lo + static_cast<double>(i) * step);
  return g;
}

inline std::vector<double> even_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(i == points - 1 ? hi : lo + (hi - lo) * i / (points - 1));
  return g;
}

namespace detail {

inline void add_curve(Table& t, const VarianceCurve& c, const std::string& prefix_col = "") {
  for (const auto& r : c.rows) {
    std::vector<std::string> row;
    if (!prefix_col.empty()) row.push_back(prefix_col);
    row.insert(row.end(), {num(r.dependence), method_name(r.method), r.component, format_optional(r.variance)});
    t.add(std::move(row));
  }
}

// variance curves evaluated point by point in parallel, concatenated in grid order
inline VarianceCurve parallel_curve(const JointModel& tmpl, const std::vector<double>& grid,
                                    const std::vector<Method>& methods, const AsymOptions& o, unsigned threads) {
  std::vector<VarianceCurve> parts(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { parts[i] = variance_curve(tmpl, {grid[i]}, methods, o); },
               threads ? threads : thread_count());
  VarianceCurve out;
  for (auto& p : parts) {
    out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
    out.warnings.insert(out.warnings.end(), p.warnings.begin(), p.warnings.end());
  }
  return out;
}

inline json methods_json(const std::vector<Method>& ms) {
  json a = json::array();
  for (Method m : ms) a.push_back(method_name(m));
  return a;
}

inline json grid_json(const std::vector<double>& g) {
  json a = json::array();
  for (double v : g) a.push_back(v);
  return a;
}

const std::vector<Method> gumbel_methods = {Method::BaselineMl, Method::BaselineMoment, Method::JointMl,
                                            Method::MomentMf, Method::MarginalMlMf};

inline ExperimentReport gumbel_figure(const ExperimentConfig& c, bool location_default) {
  JointModel tmpl = c.model.value_or(JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 0.5));
  std::vector<double> grid = c.grid.empty() ? linear_grid(0.1, 1.0, 0.05) : c.grid;
  std::vector<Method> methods = c.methods.empty() ? gumbel_methods : c.methods;
  AsymOptions o;
  o.location_only = c.location_only.value_or(location_default);
  o.dependence_known = c.dependence_known.value_or(true);
  ExperimentReport rep;
  rep.id = experiment_name(c.id);
  Table t{"curve", {"dependence", "method", "component", "variance"}, {}};
  VarianceCurve curve = parallel_curve(tmpl, grid, methods, o, c.threads);
  add_curve(t, curve);
  rep.tables.push_back(std::move(t));
  rep.warnings = curve.warnings;
  rep.config = {{"experiment", rep.id},
                {"seed", *c.seed},
                {"model", model_json(tmpl)},
                {"grid", grid_json(grid)},
                {"methods", methods_json(methods)},
                {"location_only", o.location_only},
                {"dependence_known", o.dependence_known},
                {"regime", "m = infinity"}};
  return rep;
}

inline ExperimentReport bernoulli_figure(const ExperimentConfig& c) {
  const double p2 = 0.5, sweep_p1 = 0.5;
  std::vector<double> p1_grid = c.grid.empty() ? linear_grid(0.02, 0.98, 0.02) : c.grid;
  std::vector<Method> methods =
      c.methods.empty() ? std::vector<Method>{Method::BaselineMl, Method::MomentMf, Method::MarginalMlMf, Method::JointMl}
                        : c.methods;
  AsymOptions o;
  o.dependence_known = c.dependence_known.value_or(true);
  struct Panel {
    CopulaId id;
    double dep;
  };
  std::vector<Panel> panels;
  for (double rho : {0.5, 0.7, 0.95}) panels.push_back({CopulaId::Gaussian, rho});
  for (double r : {0.1, 0.25, 0.5}) panels.push_back({CopulaId::GumbelHougaard, r});

  ExperimentReport rep;
  rep.id = experiment_name(c.id);
  Table pt{"panels", {"copula", "dependence", "p1", "method", "variance"}, {}};
  for (const Panel& p : panels)
    for (double p1 : p1_grid)
      for (Method m : methods) {
        std::string v;
        try {
          v = num(asym_cov(m, JointModel::bernoulli_copula(p1, p2, Copula(p.id, p.dep)), o)(0, 0));
        } catch (const Error& e) {
          rep.warnings.push_back(std::string(method_name(m)) + " at p1=" + num(p1) + ": " + e.what());
        }
        pt.add({copula_name(p.id), num(p.dep), num(p1), method_name(m), v});
      }

  Table st{"sweep", {"copula", "dependence", "method", "component", "variance"}, {}};
  std::vector<double> rho_grid = even_grid(0.0, 0.99, 40), r_grid = even_grid(0.05, 1.0, 40);
  for (CopulaId id : {CopulaId::Gaussian, CopulaId::GumbelHougaard}) {
    JointModel tmpl = JointModel::bernoulli_copula(sweep_p1, p2, Copula(id, 0.5));
    VarianceCurve curve = variance_curve(tmpl, id == CopulaId::Gaussian ? rho_grid : r_grid, methods, o);
    add_curve(st, curve, copula_name(id));
    rep.warnings.insert(rep.warnings.end(), curve.warnings.begin(), curve.warnings.end());
  }

  Table sm{"samples", {"copula", "dependence", "u1", "u2"}, {}};
  const std::size_t per_panel = 500;
  for (std::size_t k = 0; k < panels.size(); ++k) {
    RngStream rng(*c.seed + k);
    Copula cop(panels[k].id, panels[k].dep);
    for (std::size_t i = 0; i < per_panel; ++i) {
      auto [u1, u2] = cop.sample(rng);
      sm.add({copula_name(panels[k].id), num(panels[k].dep), num(u1), num(u2)});
    }
  }
  rep.tables = {std::move(pt), std::move(st), std::move(sm)};
  rep.config = {{"experiment", rep.id},
                {"seed", *c.seed},
                {"p2", p2},
                {"p1_grid", grid_json(p1_grid)},
                {"sweep_p1", sweep_p1},
                {"sweep_points", 40},
                {"sweep_rho", {0.0, 0.99}},
                {"sweep_r", {0.05, 1.0}},
                {"samples_per_panel", per_panel},
                {"methods", methods_json(methods)},
                {"dependence_known", o.dependence_known},
                {"regime", "m = infinity"}};
  return rep;
}

inline ExperimentReport mixture_figure(const ExperimentConfig& c) {
  JointModel tmpl = c.model.value_or(JointModel::bernoulli_mixture(0.5));
  if (tmpl.id() != ModelId::BernoulliMixture) fail(ErrorKind::Usage, "experiments", "fig5 needs the bernoulli mixture");
  std::vector<double> grid = c.grid.empty() ? linear_grid(0.02, 0.98, 0.02) : c.grid;
  std::vector<Method> methods =
      c.methods.empty() ? std::vector<Method>{Method::BaselineMl, Method::BaselineMoment, Method::MomentMf, Method::JointMl}
                        : c.methods;
  ExperimentReport rep;
  rep.id = experiment_name(c.id);
  Table t{"curve", {"p", "method", "component", "variance"}, {}};
  VarianceCurve curve = variance_curve(tmpl, grid, methods, {});
  add_curve(t, curve);
  Table cv{"covariance", {"p", "cov", "corr"}, {}};
  for (double p : grid) {
    JointModel m = tmpl.with_eta(Eigen::VectorXd::Constant(1, p));
    auto id = [](double x) { return Eigen::VectorXd::Constant(1, x); };
    MomentMatrices mm = moment_matrices(m, id);
    cv.add({num(p), num(mm.c_hl(0, 0)), num(mm.c_hl(0, 0) / std::sqrt(mm.c_hh(0, 0) * mm.c_ll(0, 0)))});
  }
  rep.tables = {std::move(t), std::move(cv)};
  rep.warnings = curve.warnings;
  rep.config = {{"experiment", rep.id},
                {"seed", *c.seed},
                {"model", model_json(tmpl)},
                {"p2", tmpl.mixing().m1()},
                {"grid", grid_json(grid)},
                {"methods", methods_json(methods)},
                {"regime", "m = infinity"}};
  return rep;
}

}  // namespace detail

inline ExperimentReport run_figure(const ExperimentConfig& c) {
  require_seed(c);
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  switch (c.id) {
    case ExperimentId::Fig1: rep = detail::gumbel_figure(c, true); break;
    case ExperimentId::Fig2: rep = detail::gumbel_figure(c, false); break;
    case ExperimentId::Fig3: rep = detail::bernoulli_figure(c); break;
    case ExperimentId::Fig5: rep = detail::mixture_figure(c); break;
    default: fail(ErrorKind::Usage, "experiments", "run_figure handles fig1, fig2, fig3 and fig5");
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace mfmc
