#pragma once

#include <stdexcept>
#include <string>

namespace sgf {

// Failure classes map one-to-one onto CLI exit codes (1, 2, 3).
enum class ErrorKind { kConfig, kData, kClient };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ClientError : public Error {
 public:
  explicit ClientError(const std::string& what) : Error(ErrorKind::kClient, what) {}
};

}  // namespace sgf
