#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace regstyle {

enum class ErrorCode {
  // textproc
  InvalidN,
  // biber_mda
  EmptyDocument,
  InsufficientCorpus,
  DegenerateCorpus,
  CatalogMismatch,
  ZeroVector,
  DimensionMismatch,
  InvalidCatalog,
  InvalidModel,
  // metrics
  NoReferences,
  InvalidProbability,
  // providers
  EndpointUnavailable,
  BadRequest,
  EmptyCompletion,
  ScorerUnavailable,
  InvalidRequest,
  // llm_pipeline
  MissingBinding,
  NoGoldReference,
  // datasets
  SchemaViolation,
  IoFailure,
  InsufficientAuthors,
  InsufficientPool,
  // cli
  Usage,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

/// Every recoverable failure in the library is reported as an Error carrying
/// a code that callers can branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace regstyle
