#include "regstyle/error.hpp"

namespace regstyle {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorCode::DegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::CatalogMismatch: return "CatalogMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidCatalog: return "InvalidCatalog";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NoReferences: return "NoReferences";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::EmptyCompletion: return "EmptyCompletion";
    case ErrorCode::ScorerUnavailable: return "ScorerUnavailable";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::NoGoldReference: return "NoGoldReference";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::InsufficientAuthors: return "InsufficientAuthors";
    case ErrorCode::InsufficientPool: return "InsufficientPool";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::Usage); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

}  // namespace regstyle
