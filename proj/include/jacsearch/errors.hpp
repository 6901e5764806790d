#pragma once

#include <stdexcept>
#include <string>

namespace jacsearch {

enum class ErrorKind {
  BadInput,
  Io,
  Internal,
  CompositeCharacteristic,
  ReduciblePolynomial,
  UnsupportedDegree,
  FieldMismatch,
  DivisionByZero,
  ZeroInput,
  ZeroPolynomial,
  SingularCurve,
  BadDegree,
  NotMonic,
  CurveMismatch,
  NotPrimorial,
  AmbiguousOrder,
  NonDivisibleOrders,
  NoCandidate,
  Ambiguous,
  FieldTooSmall,
  FieldTooLarge,
  InvalidCounts,
  UnknownContext,
  OutOfCalibratedRange,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Internal: return "Internal";
    case ErrorKind::CompositeCharacteristic: return "CompositeCharacteristic";
    case ErrorKind::ReduciblePolynomial: return "ReduciblePolynomial";
    case ErrorKind::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorKind::FieldMismatch: return "FieldMismatch";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::ZeroInput: return "ZeroInput";
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::SingularCurve: return "SingularCurve";
    case ErrorKind::BadDegree: return "BadDegree";
    case ErrorKind::NotMonic: return "NotMonic";
    case ErrorKind::CurveMismatch: return "CurveMismatch";
    case ErrorKind::NotPrimorial: return "NotPrimorial";
    case ErrorKind::AmbiguousOrder: return "AmbiguousOrder";
    case ErrorKind::NonDivisibleOrders: return "NonDivisibleOrders";
    case ErrorKind::NoCandidate: return "NoCandidate";
    case ErrorKind::Ambiguous: return "Ambiguous";
    case ErrorKind::FieldTooSmall: return "FieldTooSmall";
    case ErrorKind::FieldTooLarge: return "FieldTooLarge";
    case ErrorKind::InvalidCounts: return "InvalidCounts";
    case ErrorKind::UnknownContext: return "UnknownContext";
    case ErrorKind::OutOfCalibratedRange: return "OutOfCalibratedRange";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void check(bool ok, ErrorKind kind, const char* msg) {
  if (!ok) fail(kind, msg);
}

inline void check(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

// Internal consistency checks stay on in release builds.
inline void invariant(bool ok, const char* msg) {
  check(ok, ErrorKind::Internal, msg);
}

}  // namespace jacsearch
