#pragma once

#include <stdexcept>
#include <string>

namespace mfmc {

enum class ErrorKind {
  Domain,
  NumericalDomain,
  DegenerateMoments,
  DegenerateData,
  Integration,
  EstimationFailure,
  SingularSystem,
  Parse,
  Dataset,
  Usage,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NumericalDomain: return "numerical_domain";
    case ErrorKind::DegenerateMoments: return "degenerate_moments";
    case ErrorKind::DegenerateData: return "degenerate_data";
    case ErrorKind::Integration: return "integration";
    case ErrorKind::EstimationFailure: return "estimation_failure";
    case ErrorKind::SingularSystem: return "singular_system";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Dataset: return "dataset";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

// 2 usage, 3 bad data, 4 numerical trouble
inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return 2;
    case ErrorKind::Domain:
    case ErrorKind::DegenerateMoments:
    case ErrorKind::DegenerateData:
    case ErrorKind::Parse:
    case ErrorKind::Dataset: return 3;
    default: return 4;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }
  std::string code() const { return module_ + "." + kind_name(kind_); }
  int exit_code() const { return exit_code_for(kind_); }

 private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& module, const std::string& msg) {
  throw Error(kind, module, msg);
}

inline constexpr double euler_gamma = 0.5772156649015329;
inline constexpr double pi = 3.14159265358979323846;

}  // namespace mfmc
