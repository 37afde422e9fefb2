#pragma once

#include <json.hpp>

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mfmc/core/error.hpp"
#include "mfmc/estimators/estimate.hpp"

namespace mfmc {

using json = nlohmann::ordered_json;

inline json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return a;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorKind::Parse, "io", "expected a numeric array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::Parse, "io", "expected a numeric array");
    v(i) = j[i].get<double>();
  }
  return v;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::Parse, "io", "expected a matrix");
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    Eigen::VectorXd r = vector_from_json(j[i]);
    if (r.size() != m.cols()) fail(ErrorKind::Parse, "io", "ragged matrix");
    m.row(i) = r.transpose();
  }
  return m;
}

inline json to_json(const Estimate& e) {
  json j;
  j["method"] = method_name(e.method);
  j["labels"] = e.labels;
  j["theta1"] = to_json(e.theta1);
  j["sigma"] = to_json(e.sigma);
  j["n"] = e.n;
  j["m"] = e.m;
  j["infinite_m"] = e.infinite_m;
  if (e.theta2) j["theta2"] = to_json(*e.theta2);
  if (e.theta12) j["theta12"] = to_json(*e.theta12);
  if (e.coefficients) {
    json c;
    c["mode"] = e.coefficients->mode;
    if (!e.coefficients->alpha.empty()) {
      json a = json::array();
      for (const auto& v : e.coefficients->alpha) a.push_back(to_json(v));
      c["alpha"] = a;
    }
    if (e.coefficients->beta.size() > 0) c["beta"] = to_json(e.coefficients->beta);
    j["coefficients"] = c;
  }
  j["warnings"] = e.warnings;
  return j;
}

inline Estimate estimate_from_json(const json& j) {
  try {
    Estimate e;
    e.method = parse_method(j.at("method").get<std::string>());
    e.labels = j.value("labels", std::vector<std::string>{});
    e.theta1 = vector_from_json(j.at("theta1"));
    e.sigma = matrix_from_json(j.at("sigma"));
    if (e.sigma.rows() != e.theta1.size() || e.sigma.cols() != e.theta1.size())
      fail(ErrorKind::Parse, "io", "sigma does not match theta1");
    e.n = j.at("n").get<std::size_t>();
    e.m = j.value("m", std::size_t{0});
    e.infinite_m = j.value("infinite_m", false);
    if (j.contains("theta2")) e.theta2 = vector_from_json(j["theta2"]);
    if (j.contains("theta12")) e.theta12 = vector_from_json(j["theta12"]);
    if (j.contains("coefficients")) {
      Coefficients c;
      c.mode = j["coefficients"].value("mode", std::string("fixed"));
      if (j["coefficients"].contains("alpha"))
        for (const auto& a : j["coefficients"]["alpha"]) c.alpha.push_back(vector_from_json(a));
      if (j["coefficients"].contains("beta")) c.beta = vector_from_json(j["coefficients"]["beta"]);
      e.coefficients = c;
    }
    e.warnings = j.value("warnings", std::vector<std::string>{});
    return e;
  } catch (const json::exception& x) {
    fail(ErrorKind::Parse, "io", std::string("malformed estimate: ") + x.what());
  }
}

inline json error_json(const Error& e) {
  json j;
  j["error"] = {{"code", e.code()}, {"module", e.module()}, {"kind", kind_name(e.kind())}, {"message", e.what()}};
  return j;
}

}  // namespace mfmc
