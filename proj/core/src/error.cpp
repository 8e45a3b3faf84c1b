#include "degcarl/error.hpp"

namespace degcarl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::Evaluation: return "evaluation error";
    case ErrorKind::InvalidCoefficient: return "invalid coefficient";
    case ErrorKind::UnsupportedConfiguration: return "unsupported configuration";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::NumericalFailure: return "numerical failure";
    case ErrorKind::HypothesisViolation: return "hypothesis violation";
    case ErrorKind::Precondition: return "precondition error";
    case ErrorKind::StepFailure: return "step failure";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Pole: return "pole error";
    case ErrorKind::Construction: return "construction error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
  }
  return "error";
}

}  // namespace degcarl
