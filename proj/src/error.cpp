#include "pulsegate/error.hpp"

namespace pulsegate {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::DegenerateInput: return "degenerate-input";
        case ErrorKind::DegenerateCorrelation: return "degenerate-correlation";
        case ErrorKind::InvalidTrainingSet: return "invalid-training-set";
        case ErrorKind::EmptyComparison: return "empty-comparison";
        case ErrorKind::Coverage: return "coverage";
        case ErrorKind::NumericalFailure: return "numerical-failure";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace pulsegate
