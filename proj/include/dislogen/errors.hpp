#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dislogen {

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI when it reports failures as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& m) : Error("parameter", m) {}
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& m) : Error("degenerate_input", m) {}
};

class IoError : public Error {
 public:
  IoError(const std::string& m, std::string path)
      : Error("io", m + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& m) : Error("sampling", m) {}
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& m) : Error("bounds", m) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error("schema", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

// Raised when a record references background patches the library lacks.
class DependencyError : public Error {
 public:
  DependencyError(const std::string& m, std::vector<std::string> missing)
      : Error("dependency", m), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

struct PixelCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

// Skeleton is not a single open path. `points` holds the offending pixels:
// branch points for a branched skeleton, empty for a cycle.
class TopologyError : public Error {
 public:
  TopologyError(const std::string& m, std::vector<PixelCoord> points)
      : Error("topology", m), points_(std::move(points)) {}
  const std::vector<PixelCoord>& points() const noexcept { return points_; }

 private:
  std::vector<PixelCoord> points_;
};

}  // namespace dislogen
