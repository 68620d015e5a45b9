#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace promptstrata {

enum class ErrorKind {
  // I/O
  MissingFile,
  IoFailure,
  // input schema / invariants
  SchemaViolation,
  UnknownCountry,
  UnknownTopic,
  DuplicateImageId,
  DimensionMismatch,
  TruncatedMatrix,
  NonFiniteValue,
  NotNormalized,
  SpaceMismatch,
  MissingEmbedding,
  TooFewValues,
  DegenerateEdges,
  WrongStratumKind,
  EmptyLabel,
  EmptyCountry,
  UnknownCategory,
  MissingTranslation,
  UnresolvedPrompt,
  EmptyPool,
  MissingBaseline,
  EmptyGroup,
  InvalidPlan,
  LengthMismatch,
  AllZeroDifferences,
  GroupMismatch,
  EmptyTable,
  MissingAxis,
  InvalidSpec,
  TooLarge,
  // caller mistakes
  BadArgument,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for a failure of this kind: 1 invariant violation,
/// 2 I/O, 3 bad arguments.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string subject = {})
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The path, id or key the error is about; may be empty.
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

}  // namespace promptstrata
