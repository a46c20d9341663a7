#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ood {

// Bad flags, inconsistent build parameters, missing base distributions.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything wrong with the data itself: unreadable files, invalid records,
// unknown group keys.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public DataError {
 public:
  using DataError::DataError;
};

// Fatal structural problem in an input file. `offset` is the byte position
// at which the problem was detected.
class ParseError : public DataError {
 public:
  ParseError(std::string path, std::size_t offset, const std::string& what)
      : DataError(path + ": byte " + std::to_string(offset) + ": " + what),
        path_(std::move(path)),
        offset_(offset) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string path_;
  std::size_t offset_;
};

}  // namespace ood
