#pragma once

#include <stdexcept>
#include <string>

namespace fblab {

// Machine-readable failure categories. Each maps to a CLI exit code family:
// usage/config problems exit 2, non-converged solves exit 3.
enum class Err {
  NonPositiveLambda,    // lambda_plus^2 - lambda_minus^2 <= 0
  DegenerateData,       // alpha_plus <= 0: no positive phase on the flat boundary
  TwoPhaseOrderError,   // alpha_minus out of range (negative, or >= alpha_plus in slope)
  InvalidArgument,      // argument outside a function's documented domain
  MeshError,            // mesh construction or validation failure
  ConfigError,          // config file: syntax, unknown key, or bad value
  IoError,              // file read/write failure
  NotConverged,         // iterative solve exhausted its budget
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::NonPositiveLambda: return "NonPositiveLambda";
    case Err::DegenerateData: return "DegenerateData";
    case Err::TwoPhaseOrderError: return "TwoPhaseOrderError";
    case Err::InvalidArgument: return "InvalidArgument";
    case Err::MeshError: return "MeshError";
    case Err::ConfigError: return "ConfigError";
    case Err::IoError: return "IoError";
    case Err::NotConverged: return "NotConverged";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& message)
      : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

  Err code() const noexcept { return code_; }

 private:
  Err code_;
};

}  // namespace fblab
