#pragma once

#include <stdexcept>
#include <string>

namespace dgmo {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Input bytes are not in a format we understand (bad magic, unsupported WAV encoding).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Format recognised, but the payload disagrees with its own header.
class CorruptionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Caller broke a precondition: shape mismatch, config mismatch between artifacts.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A configuration value is invalid on its own.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mathematically undefined input (silent reference, silent stem).
class DomainError : public Error {
 public:
  using Error::Error;
};

class OptimizationError : public Error {
 public:
  using Error::Error;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgmo
