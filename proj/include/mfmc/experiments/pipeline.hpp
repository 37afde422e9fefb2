#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "mfmc/estimators.hpp"
#include "mfmc/experiments/config.hpp"
#include "mfmc/experiments/figures.hpp"
#include "mfmc/experiments/report.hpp"
#include "mfmc/io/csv.hpp"
#include "mfmc/qoi/qoi.hpp"

namespace mfmc {

namespace detail {

inline constexpr std::size_t qq_points = 1000;

template <class F>
auto pipeline_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), e.module(), "pipeline stage '" + stage + "': " + e.what());
  }
}

inline MFDataset synthetic_dataset(const JointModel& gen, std::size_t n, std::size_t m, std::uint64_t seed) {
  RngStream rng(seed);
  auto s = gen.sample(n + m, rng);
  std::vector<double> a(n), b(n), l(m);
  for (std::size_t i = 0; i < n; ++i) std::tie(a[i], b[i]) = s[i];
  for (std::size_t j = 0; j < m; ++j) l[j] = s[n + j].second;
  return MFDataset(std::move(a), std::move(b), std::move(l));
}

}  // namespace detail

// MF method and the baseline its interval is compared against
inline const std::vector<std::pair<Method, Method>> pipeline_pairs = {{Method::JointMl, Method::BaselineMl},
                                                                      {Method::MarginalMlMf, Method::BaselineMl},
                                                                      {Method::MomentMf, Method::BaselineMoment}};

// Fit margins, fit r on the paired block, compare baseline and multifidelity estimates, map through the QoIs.
inline ExperimentReport run_pipeline(const ExperimentConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.id = experiment_name(ExperimentId::Pipeline);
  json cfg;
  cfg["experiment"] = rep.id;

  JointModel gen = c.model.value_or(JointModel::bivariate_gumbel(2.0, 4.0, 2.0, 1.0, 0.5));
  if (gen.id() != ModelId::BivariateGumbel)
    fail(ErrorKind::Usage, "experiments", "the pipeline fits the bivariate gumbel model");
  std::optional<MFDataset> loaded;
  if (c.dataset) {
    loaded = *c.dataset;
    cfg["source"] = "dataset";
  } else if (!c.dataset_path.empty()) {
    loaded = detail::pipeline_stage("load", [&] { return load_dataset(c.dataset_path); });
    cfg["source"] = "csv";
    cfg["dataset"] = c.dataset_path;
  } else {
    const std::uint64_t seed = require_seed(c);
    const std::size_t n = c.n ? c.n : 100, m = c.m.value_or(99900);
    loaded = detail::pipeline_stage("generate", [&] { return detail::synthetic_dataset(gen, n, m, seed); });
    cfg["source"] = "synthetic";
    cfg["seed"] = seed;
    cfg["generator"] = model_json(gen);
  }
  const MFDataset& ds = *loaded;
  cfg["n"] = ds.n();
  cfg["m"] = ds.m();
  cfg["confidence"] = c.confidence;
  cfg["coefficients"] = "optimal-plugin";
  cfg["regime"] = "low-fidelity parameters taken from the full low-fidelity sample";

  const FamilyId fam = FamilyId::Gumbel;
  const auto labels = family_labels(fam);
  auto lofi = ds.all_lofi();
  auto wl = ds.all_lofi_weights();

  // stage 1: margins
  Eigen::VectorXd t1 = detail::pipeline_stage("margins", [&] { return marginal_mle(ds.x1(), ds.paired_weights(), fam); });
  Eigen::VectorXd t2 = detail::pipeline_stage("margins", [&] { return marginal_mle(lofi, wl, fam); });
  Table margins{"margins", {"block", "parameter", "estimate"}, {}};
  for (int l = 0; l < 2; ++l) margins.add({"high-fidelity paired", labels[l], num(t1(l))});
  for (int l = 0; l < 2; ++l) margins.add({"low-fidelity all", labels[l], num(t2(l))});

  // stage 2: dependence, low-fidelity margin held at its full-sample fit
  JointModel tmpl = JointModel::bivariate_gumbel(t1(0), t1(1), t2(0), t2(1), gen.dependence());
  Estimate jml = detail::pipeline_stage("dependence", [&] {
    JointMlOptions o;
    o.theta2_known = true;
    return joint_ml(ds, tmpl, o);
  });
  const double r_hat = jml.theta12 ? (*jml.theta12)(0) : gen.dependence();
  margins.add({"dependence", "r", num(r_hat)});

  // stage 3: estimates
  std::vector<Estimate> ests = detail::pipeline_stage("estimates", [&] {
    std::vector<Estimate> v;
    v.push_back(baseline_ml(ds.x1(), ds.paired_weights(), fam));
    v.push_back(baseline_moment(ds.x1(), ds.paired_weights(), moment_map(fam)));
    v.back().labels = labels;
    v.push_back(jml);
    v.push_back(marginal_ml_mf(ds, fam));
    v.push_back(moment_mf(ds, fam));
    return v;
  });
  for (const auto& e : ests)
    for (const auto& w : e.warnings) rep.warnings.push_back(std::string(method_name(e.method)) + ": " + w);
  Table et{"estimates", {"method", "component", "estimate", "std_error", "lower", "upper", "width"}, {}};
  for (const auto& e : ests)
    for (int l = 0; l < e.theta1.size(); ++l) {
      double var = e.sigma(l, l) / static_cast<double>(e.n);
      Interval iv = normal_interval(e.theta1(l), var, c.confidence, Sided::Two);
      et.add({method_name(e.method), labels[l], num(e.theta1(l)), num(std::sqrt(std::max(var, 0.0))), num(iv.lower),
              num(iv.upper), num(iv.width())});
    }

  // stage 4: quantities of interest
  std::vector<QoISpec> qois = c.qois.empty() ? std::vector<QoISpec>{QoISpec::exceedance(6.5), QoISpec::quantile(0.99)}
                                             : c.qois;
  Table qt{"qoi", {"method", "qoi", "estimate", "std_error", "lower", "upper", "width"}, {}};
  detail::pipeline_stage("qoi", [&] {
    for (const auto& q : qois)
      for (const auto& e : ests) {
        QoIResult r = qoi_estimate(q, e, c.confidence);
        for (const auto& w : r.warnings) rep.warnings.push_back(std::string(method_name(e.method)) + " " + r.label + ": " + w);
        qt.add({method_name(e.method), r.label, num(r.point), num(std::sqrt(r.variance)), num(r.interval.lower),
                num(r.interval.upper), num(r.interval.width())});
      }
    return 0;
  });
  double max_x1 = *std::max_element(ds.x1().begin(), ds.x1().end());
  for (const auto& q : qois)
    if (q.kind == QoIKind::Log10Exceedance && max_x1 < q.level)
      rep.warnings.push_back("no paired high-fidelity value exceeds " + num(q.level) + "; " + q.label() +
                             " is a model extrapolation");

  // stage 5: QQ data of the low-fidelity sample against its fitted Gumbel
  Table qq{"qq", {"probability", "empirical", "fitted"}, {}};
  {
    std::vector<double> sorted = lofi;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t N = sorted.size();
    const std::size_t step = std::max<std::size_t>(1, N / detail::qq_points);
    for (std::size_t i = 0; i < N; i += step) {
      double p = (static_cast<double>(i) + 0.5) / static_cast<double>(N);
      qq.add({num(p), num(sorted[i]), num(t2(0) - t2(1) * std::log(-std::log(p)))});
    }
    if ((N - 1) % step != 0) {
      double p = (static_cast<double>(N) - 0.5) / static_cast<double>(N);
      qq.add({num(p), num(sorted[N - 1]), num(t2(0) - t2(1) * std::log(-std::log(p)))});
    }
  }

  json qj = json::array();
  for (const auto& q : qois) qj.push_back(qoi_json(q));
  cfg["qois"] = qj;
  cfg["qq_points"] = qq.rows.size();
  rep.config = cfg;
  rep.tables = {std::move(margins), std::move(et), std::move(qt), std::move(qq)};
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// width of `method`'s interval for `component` in a pipeline report
inline double pipeline_width(const ExperimentReport& rep, Method method, const std::string& component) {
  const Table& t = rep.table("estimates");
  const int cm = t.column("method"), cc = t.column("component"), cw = t.column("width");
  for (const auto& r : t.rows)
    if (r[cm] == method_name(method) && r[cc] == component) return *parse_double(r[cw]);
  fail(ErrorKind::Usage, "experiments", std::string("no estimate for ") + method_name(method));
}

}  // namespace mfmc
