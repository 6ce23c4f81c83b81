#include "resolvent_lab/error.hpp"

namespace rlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CuspSingularity: return "CuspSingularity";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::RadiusTooLarge: return "RadiusTooLarge";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::LeftChart: return "LeftChart";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::FitDegenerate: return "FitDegenerate";
  }
  return "Unknown";
}

}  // namespace rlab
