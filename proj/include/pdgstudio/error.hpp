#pragma once

#include <stdexcept>
#include <string>

namespace pdg {

/// Failure class used to pick a process exit code: validation problems exit 1,
/// I/O problems exit 2.
enum class ErrorCategory { Validation, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// A motion parameter outside its edge's closed range.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// A node or edge id that does not exist.
class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Bad scalar arguments (frame counts, schedule bounds, raster sizes).
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Tensor or raster shapes that do not line up.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// A JSON document that parses but violates its schema.
class DocumentError : public Error {
 public:
  explicit DocumentError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Missing, unreadable, unwritable or corrupt files.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

enum class SceneErrorKind {
  MissingFile,
  Malformed,
  DimensionMismatch,
  MaskOverlap,
  InvalidDepth,
  OverlappingPrimitives,
};

class SceneError : public Error {
 public:
  SceneError(SceneErrorKind kind, const std::string& what)
      : Error(kind == SceneErrorKind::MissingFile ? ErrorCategory::Io : ErrorCategory::Validation,
              what),
        kind_(kind) {}

  SceneErrorKind kind() const noexcept { return kind_; }

 private:
  SceneErrorKind kind_;
};

/// Bundle integrity failures (checksum mismatch, missing artifact).
class BundleError : public Error {
 public:
  explicit BundleError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

/// A metric that has no defined value on the given inputs.
class MetricError : public Error {
 public:
  explicit MetricError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

}  // namespace pdg
