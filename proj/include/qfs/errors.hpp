#pragma once

#include <stdexcept>
#include <string>

namespace qfs {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, incomplete or non-finite feature archive. Carries the offending
/// record id when the problem is local to one record.
class ArchiveError : public Error {
 public:
  explicit ArchiveError(const std::string& what, std::string record_id = {})
      : Error(record_id.empty() ? what : what + " (record '" + record_id + "')"),
        record_id_(std::move(record_id)) {}

  const std::string& record_id() const noexcept { return record_id_; }

 private:
  std::string record_id_;
};

/// No feature map has a strictly positive importance; the image is skipped.
class EmptySelection : public Error {
 public:
  explicit EmptySelection(std::string image_id)
      : Error("no positively contributing feature map for image '" + image_id + "'"),
        image_id_(std::move(image_id)) {}

  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string image_id_;
};

/// Problem size beyond what the requested method can hold in memory.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Iterative eigensolver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace qfs
