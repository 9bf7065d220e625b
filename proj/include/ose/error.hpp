#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace ose {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input with no usable structure (constant images, empty overlaps).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Physically inconsistent optical setup, e.g. undersampled speckle.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

class NonSeparable : public Error {
 public:
  NonSeparable(double min_genuine, double max_impostor);
  double min_genuine() const noexcept { return min_genuine_; }
  double max_impostor() const noexcept { return max_impostor_; }

 private:
  double min_genuine_;
  double max_impostor_;
};

class IoError : public Error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : Error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline NonSeparable::NonSeparable(double min_genuine, double max_impostor)
    : Error("score populations overlap: min genuine " + std::to_string(min_genuine) +
            " <= max impostor " + std::to_string(max_impostor)),
      min_genuine_(min_genuine),
      max_impostor_(max_impostor) {}

}  // namespace ose
