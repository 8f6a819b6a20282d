#pragma once

#include <stdexcept>
#include <string>

namespace adforge {

// Base class for all pipeline errors. The CLI maps these onto exit codes:
// schema/config problems exit 3, everything else exits 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- file and record I/O ---
struct IoError : Error {
  using Error::Error;
};
struct MissingFile : IoError {
  using IoError::IoError;
};
struct SchemaError : Error {
  using Error::Error;
};

// --- dataset handling ---
struct TooFewExamples : Error {
  using Error::Error;
};
struct EmptyCorpus : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};

// --- classifier training and persistence ---
struct SingleClassTraining : Error {
  using Error::Error;
};
struct FormatVersionMismatch : Error {
  using Error::Error;
};

// --- network clients ---
struct NetworkError : Error {
  using Error::Error;
};
struct TimeoutError : NetworkError {
  using NetworkError::NetworkError;
};
struct ProtocolError : Error {
  using Error::Error;
};
struct ApiError : Error {
  ApiError(int status, std::string body_text)
      : Error("api error: status " + std::to_string(status)),
        status_code(status),
        body(std::move(body_text)) {}
  int status_code;
  std::string body;
};

// --- prompt construction ---
struct EmptyPassages : Error {
  using Error::Error;
};
struct MissingField : Error {
  using Error::Error;
};
struct UnboundPlaceholder : SchemaError {
  using SchemaError::SchemaError;
};
struct MissingSeed : Error {
  using Error::Error;
};

// --- selection and SFT emission ---
struct EmptyCandidates : Error {
  using Error::Error;
};
struct InvariantViolation : Error {
  using Error::Error;
};

// --- synthetic data generation ---
struct EmptyCompletion : Error {
  using Error::Error;
};
struct SourceUnavailable : Error {
  using Error::Error;
};
struct MalformedEntity : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct MissingMention : Error {
  using Error::Error;
};

// --- recipes ---
struct MissingSource : Error {
  using Error::Error;
};
struct MissingReference : Error {
  using Error::Error;
};

// --- metrics ---
struct LengthMismatch : Error {
  using Error::Error;
};
struct AllZeroDifferences : Error {
  using Error::Error;
};
struct TooFewPairs : Error {
  using Error::Error;
};
struct MissingCell : Error {
  using Error::Error;
};

}  // namespace adforge
