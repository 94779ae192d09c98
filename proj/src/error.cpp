#include "entsampler/error.hpp"

namespace entsampler {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::DimTooLarge: return "DimTooLarge";
    case ErrorCode::NotClassical: return "NotClassical";
    case ErrorCode::NotDiagonalInPhiBasis: return "NotDiagonalInPhiBasis";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace entsampler
