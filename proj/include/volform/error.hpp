#ifndef VOLFORM_ERROR_HPP
#define VOLFORM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace volform {

enum class ErrorCode
{
  InvalidPermutation,
  SelfReference,
  DegenerateCoefficient,
  QuadratureFailure,
  UnknownField,
  NewtonDivergence,
  TwistViolation,
  LegendreFailure,
  TwistDegenerate,
  StepTooLarge,
  InvalidConfig,
};

inline const char* to_string(ErrorCode c)
{
  switch (c) {
  case ErrorCode::InvalidPermutation: return "InvalidPermutation";
  case ErrorCode::SelfReference: return "SelfReference";
  case ErrorCode::DegenerateCoefficient: return "DegenerateCoefficient";
  case ErrorCode::QuadratureFailure: return "QuadratureFailure";
  case ErrorCode::UnknownField: return "UnknownField";
  case ErrorCode::NewtonDivergence: return "NewtonDivergence";
  case ErrorCode::TwistViolation: return "TwistViolation";
  case ErrorCode::LegendreFailure: return "LegendreFailure";
  case ErrorCode::TwistDegenerate: return "TwistDegenerate";
  case ErrorCode::StepTooLarge: return "StepTooLarge";
  case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
  : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code)
  {}

  ErrorCode code() const noexcept { return _code; }

private:
  ErrorCode _code;
};

} // namespace volform

#endif
