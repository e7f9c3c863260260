#pragma once

#include <stdexcept>
#include <string>

namespace deckgen {

// Base class for every error raised by the library. Loading and validation
// are total: malformed input raises one of the typed errors below, never a
// partially constructed object.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- file / schema errors ---------------------------------------------------

class MalformedFile : public Error {
public:
  using Error::Error;
};

class SchemaViolation : public Error {
public:
  using Error::Error;
};

class EmptyDocument : public Error {
public:
  using Error::Error;
};

class BadMagic : public Error {
public:
  using Error::Error;
};

class TruncatedFile : public Error {
public:
  using Error::Error;
};

class NonFiniteValue : public Error {
public:
  using Error::Error;
};

class MissingTensor : public Error {
public:
  using Error::Error;
};

class WriteFailure : public Error {
public:
  using Error::Error;
};

// -- numeric / model errors -------------------------------------------------

class ShapeMismatch : public Error {
public:
  using Error::Error;
};

class DimMismatch : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

class MissingEmbedding : public Error {
public:
  using Error::Error;
};

class AllCandidatesUsed : public Error {
public:
  using Error::Error;
};

class InconsistentReport : public Error {
public:
  using Error::Error;
};

class InconsistentTarget : public Error {
public:
  using Error::Error;
};

class EmptySource : public Error {
public:
  using Error::Error;
};

// -- layout / metric errors -------------------------------------------------

class DoesNotFit : public Error {
public:
  using Error::Error;
};

class Overflow : public Error {
public:
  using Error::Error;
};

class EmptyGroundTruth : public Error {
public:
  using Error::Error;
};

class EmptyPrediction : public Error {
public:
  using Error::Error;
};

class EmptyGrid : public Error {
public:
  using Error::Error;
};

}  // namespace deckgen
