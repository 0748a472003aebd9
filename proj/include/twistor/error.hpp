#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twistor {

enum class ErrorCode {
  insufficient_sampling,
  invalid_grid,
  non_invertible,
  out_of_range,
  margin,
  jumping_line,
  ill_conditioned,
  wrong_path,
  not_global_form,
  not_linear_in_lambda,
  stale_factorization,
  invalid_scenario,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::insufficient_sampling: return "insufficient-sampling";
    case ErrorCode::invalid_grid: return "invalid-grid";
    case ErrorCode::non_invertible: return "non-invertible";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::margin: return "margin";
    case ErrorCode::jumping_line: return "jumping-line";
    case ErrorCode::ill_conditioned: return "ill-conditioned";
    case ErrorCode::wrong_path: return "wrong-path";
    case ErrorCode::not_global_form: return "not-a-global-form";
    case ErrorCode::not_linear_in_lambda: return "not-linear-in-lambda";
    case ErrorCode::stale_factorization: return "stale-factorization";
    case ErrorCode::invalid_scenario: return "invalid-scenario";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace twistor
