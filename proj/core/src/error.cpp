#include "promptstrata/error.hpp"

namespace promptstrata {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::UnknownCountry: return "UnknownCountry";
    case ErrorKind::UnknownTopic: return "UnknownTopic";
    case ErrorKind::DuplicateImageId: return "DuplicateImageId";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TruncatedMatrix: return "TruncatedMatrix";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::SpaceMismatch: return "SpaceMismatch";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::TooFewValues: return "TooFewValues";
    case ErrorKind::DegenerateEdges: return "DegenerateEdges";
    case ErrorKind::WrongStratumKind: return "WrongStratumKind";
    case ErrorKind::EmptyLabel: return "EmptyLabel";
    case ErrorKind::EmptyCountry: return "EmptyCountry";
    case ErrorKind::UnknownCategory: return "UnknownCategory";
    case ErrorKind::MissingTranslation: return "MissingTranslation";
    case ErrorKind::UnresolvedPrompt: return "UnresolvedPrompt";
    case ErrorKind::EmptyPool: return "EmptyPool";
    case ErrorKind::MissingBaseline: return "MissingBaseline";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::InvalidPlan: return "InvalidPlan";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorKind::GroupMismatch: return "GroupMismatch";
    case ErrorKind::EmptyTable: return "EmptyTable";
    case ErrorKind::MissingAxis: return "MissingAxis";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BadArgument: return "BadArgument";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile:
    case ErrorKind::IoFailure:
      return 2;
    case ErrorKind::BadArgument:
      return 3;
    default:
      return 1;
  }
}

}  // namespace promptstrata
