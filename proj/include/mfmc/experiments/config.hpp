#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/estimators/dataset.hpp"
#include "mfmc/estimators/estimate.hpp"
#include "mfmc/io/json_io.hpp"
#include "mfmc/models/joint.hpp"
#include "mfmc/qoi/qoi.hpp"

namespace mfmc {

enum class ExperimentId { Fig1, Fig2, Fig3, Fig5, McValidate, Pipeline };

inline const char* experiment_name(ExperimentId e) {
  switch (e) {
    case ExperimentId::Fig1: return "fig1";
    case ExperimentId::Fig2: return "fig2";
    case ExperimentId::Fig3: return "fig3";
    case ExperimentId::Fig5: return "fig5";
    case ExperimentId::McValidate: return "mc-validate";
    case ExperimentId::Pipeline: return "pipeline";
  }
  return "?";
}

inline ExperimentId parse_experiment(const std::string& s) {
  for (ExperimentId e : {ExperimentId::Fig1, ExperimentId::Fig2, ExperimentId::Fig3, ExperimentId::Fig5,
                         ExperimentId::McValidate, ExperimentId::Pipeline})
    if (s == experiment_name(e)) return e;
  fail(ErrorKind::Usage, "experiments", "unknown experiment '" + s + "'");
}

// Unset fields fall back to the experiment's defaults.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::Fig1;
  std::optional<std::uint64_t> seed;
  std::optional<JointModel> model;
  std::vector<double> grid;
  std::size_t replications = 0;
  std::size_t n = 0;
  std::optional<std::size_t> m;  // unset or known_lofi: low-fidelity law treated as known
  bool known_lofi = true;
  std::vector<Method> methods;
  std::vector<QoISpec> qois;
  std::optional<bool> location_only;
  std::optional<bool> dependence_known;
  bool true_coefficients = false;
  double confidence = 0.95;
  std::optional<MFDataset> dataset;
  std::string dataset_path;
  unsigned threads = 0;  // 0: MFMC_THREADS
};

inline std::uint64_t require_seed(const ExperimentConfig& c) {
  if (!c.seed) fail(ErrorKind::Usage, "experiments", std::string("a base seed is required for ") + experiment_name(c.id));
  return *c.seed;
}

inline json model_json(const JointModel& m) {
  json j;
  j["model"] = model_name(m.id());
  j["eta"] = to_json(m.eta());
  if (m.id() == ModelId::BernoulliCopula) j["copula"] = copula_name(m.copula_id());
  if (m.id() == ModelId::BernoulliMixture) j["mixing_beta"] = {m.mixing().a, m.mixing().b};
  return j;
}

inline json qoi_json(const QoISpec& q) {
  json j;
  j["kind"] = qoi_kind_name(q.kind);
  j["level"] = q.level;
  return j;
}

}  // namespace mfmc
