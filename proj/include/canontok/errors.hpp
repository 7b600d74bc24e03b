#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canontok {

// Base for every error raised by the library. The CLI maps these to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or document. The message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A token id outside the vocabulary.
class InvalidSequenceError : public Error {
 public:
  using Error::Error;
};

// The encoder could not tokenize the input at `position` (character offset).
class EncodingError : public Error {
 public:
  EncodingError(const std::string& what, std::size_t position)
      : Error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

// No canonical continuation exists (normalization constant is zero).
class DeadEndError : public Error {
 public:
  DeadEndError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Mathematical domain violation, e.g. KL divergence without absolute continuity.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace canontok
