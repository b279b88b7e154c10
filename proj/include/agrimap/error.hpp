#pragma once

#include <stdexcept>
#include <string>

namespace agrimap {

/// Base class of every structured error thrown by this library. CLI tools map
/// any Error subclass to exit code 1; anything else is a bug.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// geometry / projection
class NonPositiveDepth : public Error {
 public:
  using Error::Error;
};
class DegenerateBaseline : public Error {
 public:
  using Error::Error;
};
class NegativeDepth : public Error {
 public:
  using Error::Error;
};

// two-view estimation
class InsufficientCorrespondences : public Error {
 public:
  using Error::Error;
};
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};
class ZeroScores : public Error {
 public:
  using Error::Error;
};
class CheiralityAmbiguous : public Error {
 public:
  using Error::Error;
};

// depth filter
class InvalidRange : public Error {
 public:
  using Error::Error;
};

// trajectory evaluation / alignment
class NoOverlap : public Error {
 public:
  using Error::Error;
};
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};
class ZeroSpread : public Error {
 public:
  using Error::Error;
};

// depth metrics
class NoValidPixels : public Error {
 public:
  using Error::Error;
};
class ZeroMedian : public Error {
 public:
  using Error::Error;
};

// map post-processing
class InvalidGeodetic : public Error {
 public:
  using Error::Error;
};
class TooFewPoints : public Error {
 public:
  using Error::Error;
};
class ZeroRadius : public Error {
 public:
  using Error::Error;
};
class EmptyInput : public Error {
 public:
  using Error::Error;
};

// synthesis
class NoVisiblePoints : public Error {
 public:
  using Error::Error;
};

// I/O
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};
class NonMonotonicTimestamps : public Error {
 public:
  using Error::Error;
};
class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};
class MalformedHeader : public Error {
 public:
  using Error::Error;
};

// CLI / pipeline configuration
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace agrimap
