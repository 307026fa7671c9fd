#pragma once

#include <stdexcept>
#include <string>

namespace volcap {

// Base of every error thrown by the library. Subclasses identify the
// failure category so callers can react without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDepthError : public Error {
 public:
  using Error::Error;
};

class BehindCameraError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class EmptyBankError : public Error {
 public:
  using Error::Error;
};

class PoseLimitError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class ScaleCountError : public Error {
 public:
  using Error::Error;
};

// I/O failures: missing files, undecodable images, malformed JSON.
class MissingFileError : public Error {
 public:
  using Error::Error;
};

class ImageDecodeError : public Error {
 public:
  using Error::Error;
};

class JsonFormatError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised inside one pipeline stage and names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace volcap
