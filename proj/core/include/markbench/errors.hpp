#pragma once

#include <stdexcept>
#include <string>

namespace markbench {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed container; the message names the offending chunk.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its legal range (COLA violation, cutoff above Nyquist, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// SNR requested or measured against a zero-energy reference.
class UndefinedSnrError : public Error {
 public:
  using Error::Error;
};

/// Input too short for the requested analysis.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Manifest, plan or record file could not be loaded.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace markbench
