#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gtsne {

//! Failure categories surfaced by the library.  The CLI maps these onto
//! process exit codes: config/usage problems exit 2, I/O problems exit 3,
//! every other domain failure exits 1.
enum class errc {
  invalid_input,           // malformed points, non-finite values, bad dimensions
  kernel_definition,       // a kernel config that cannot be constructed at all
  kernel_invalid,          // a constructed kernel failing an admissibility check
  infeasible_perplexity,   // target entropy log(n*rho) not attainable
  degenerate_geometry,     // entropy flat in sigma (equidistant/duplicate points)
  no_convergence,          // iteration cap reached before tolerance
  calibration_underflow,   // all conditional mass underflowed
  divergence,              // non-finite embedding state during descent
  evaluation,              // non-finite value from a user-supplied kernel
  incompatible_triple,     // ordering hypothesis violated in the gap check
  config,                  // unusable CLI/JSON configuration
  io,                      // file read/write failure
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_input: return "invalid-input";
    case errc::kernel_definition: return "kernel-definition";
    case errc::kernel_invalid: return "kernel-invalid";
    case errc::infeasible_perplexity: return "infeasible-perplexity";
    case errc::degenerate_geometry: return "degenerate-geometry";
    case errc::no_convergence: return "no-convergence";
    case errc::calibration_underflow: return "calibration-underflow";
    case errc::divergence: return "divergence";
    case errc::evaluation: return "evaluation";
    case errc::incompatible_triple: return "incompatible-triple";
    case errc::config: return "config";
    case errc::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

//! One failed point in a batch calibration.
struct CalibrationFailure {
  std::size_t index;
  errc code;
  std::string message;
};

//! Batch calibration error carrying every failing point index.
class CalibrationError : public Error {
 public:
  CalibrationError(std::vector<CalibrationFailure> failures,
                   const std::string& summary)
      : Error(failures.empty() ? errc::no_convergence : failures.front().code,
              summary),
        failures_(std::move(failures)) {}

  const std::vector<CalibrationFailure>& failures() const noexcept {
    return failures_;
  }

 private:
  std::vector<CalibrationFailure> failures_;
};

}  // namespace gtsne
