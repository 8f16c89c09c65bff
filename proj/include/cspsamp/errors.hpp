#pragma once

#include <stdexcept>
#include <string>

namespace cspsamp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// formula construction
struct DomainTooSmall : Error { using Error::Error; };
struct MalformedConstraint : Error { using Error::Error; };
struct DuplicateViolatingTuple : Error { using Error::Error; };
struct IncompleteAssignment : Error { using Error::Error; };

// instance parsing
struct ParseError : Error {
  int line;
  ParseError(int line_no, const std::string& what)
      : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};
struct EmptyClause : ParseError { using ParseError::ParseError; };
struct VertexOutOfRange : ParseError { using ParseError::ParseError; };

// projection schemes
struct ValueOutOfDomain : Error { using Error::Error; };
struct SymbolOutOfAlphabet : Error { using Error::Error; };
struct InvalidAlphaBeta : Error { using Error::Error; };
struct PreconditionViolated : Error { using Error::Error; };
struct ConstructionFailed : Error { using Error::Error; };

// sampling schedules
struct RegimeViolated : Error { using Error::Error; };

// exact enumeration
struct BudgetExceeded : Error { using Error::Error; };
struct TooLargeToEnumerate : Error { using Error::Error; };
struct NoSolutions : Error { using Error::Error; };
struct EmptySupport : Error { using Error::Error; };
struct SampleSizeZero : Error { using Error::Error; };

}  // namespace cspsamp
