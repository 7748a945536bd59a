#ifndef CUTFUNQUE_ERROR_H_
#define CUTFUNQUE_ERROR_H_

#include <stdexcept>
#include <string>

namespace cutfunque {

// Every error carries the pipeline module that raised it so the CLI can
// report provenance ("video_io: truncated stream at byte 4096").
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  DecodeError(const std::string& message, long long byte_offset)
      : Error("video_io", message + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  long long byte_offset() const { return byte_offset_; }

 private:
  long long byte_offset_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& message) : Error("nss_features", message) {}
};

class AssemblyError : public Error {
 public:
  explicit AssemblyError(const std::string& message) : Error("binning", message) {}
};

class PredictionError : public Error {
 public:
  explicit PredictionError(const std::string& message) : Error("cli", message) {}
};

}  // namespace cutfunque

#endif  // CUTFUNQUE_ERROR_H_
