#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace superres {

enum class ErrorCode {
  degenerate_support,
  invalid_support,
  cardinality_mismatch,
  bad_pencil_parameter,
  numeric_failure,
  hypothesis_violation,
  model_violation,
  intractable_enumeration,
  even_m_required,
  scene_overflow,
  singular_fit,
  invalid_argument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::degenerate_support: return "degenerate-support";
    case ErrorCode::invalid_support: return "invalid-support";
    case ErrorCode::cardinality_mismatch: return "cardinality-mismatch";
    case ErrorCode::bad_pencil_parameter: return "bad-pencil-parameter";
    case ErrorCode::numeric_failure: return "numeric-failure";
    case ErrorCode::hypothesis_violation: return "hypothesis-violation";
    case ErrorCode::model_violation: return "model-violation";
    case ErrorCode::intractable_enumeration: return "intractable-enumeration";
    case ErrorCode::even_m_required: return "even-M-required";
    case ErrorCode::scene_overflow: return "scene-overflow";
    case ErrorCode::singular_fit: return "singular-fit";
    case ErrorCode::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace superres
