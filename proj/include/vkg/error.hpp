#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vkg {

enum class ErrorCode {
  UndeclaredPrefix,
  CyclicSubclass,
  TurtleSyntax,
  StoreSealed,
  UnknownToken,
  ZeroVector,
  DimensionMismatch,
  DuplicateToken,
  MalformedLine,
  UnlinkedEntity,
  UnknownClass,
  EmptyCorpus,
  EmptyVocab,
  InvalidConfig,
  TooFewExamples,
  SyntaxError,
  UnknownCommand,
  UnboundSetName,
  DuplicateSetName,
  UnknownRule,
  MalformedPattern,
  EmptyRelevantSet,
  InvalidStore,
  InvalidArgument,
  IoError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UndeclaredPrefix: return "UndeclaredPrefix";
    case ErrorCode::CyclicSubclass: return "CyclicSubclass";
    case ErrorCode::TurtleSyntax: return "TurtleSyntax";
    case ErrorCode::StoreSealed: return "StoreSealed";
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateToken: return "DuplicateToken";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnlinkedEntity: return "UnlinkedEntity";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyVocab: return "EmptyVocab";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooFewExamples: return "TooFewExamples";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::UnboundSetName: return "UnboundSetName";
    case ErrorCode::DuplicateSetName: return "DuplicateSetName";
    case ErrorCode::UnknownRule: return "UnknownRule";
    case ErrorCode::MalformedPattern: return "MalformedPattern";
    case ErrorCode::EmptyRelevantSet: return "EmptyRelevantSet";
    case ErrorCode::InvalidStore: return "InvalidStore";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every domain failure in the library surfaces as this exception. The code
/// is what callers branch on; the message is for humans. `line()` is set for
/// file-format errors (1-based, 0 when not applicable).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace vkg
