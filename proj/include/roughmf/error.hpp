#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace roughmf {

enum class ErrorCode {
  kInvalidInput = 1,
  kInvalidElement = 2,
  kGridTooCoarse = 3,
  kDivergence = 4,
  kIo = 5,
  kCheckFailed = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorCode::kInvalidInput, what) {}
};

// Raised by log() when the element is not group-like.
class InvalidElement : public Error {
 public:
  InvalidElement(const std::string& what, double defect)
      : Error(ErrorCode::kInvalidElement, what), defect_(defect) {}

  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

// Some adjacent grid step already has control larger than alpha, so the
// alpha-local variation cannot be resolved on this grid.
class GridTooCoarse : public Error {
 public:
  GridTooCoarse(const std::string& what, std::size_t step, double omega)
      : Error(ErrorCode::kGridTooCoarse, what), step_(step), omega_(omega) {}

  std::size_t step() const noexcept { return step_; }
  double omega() const noexcept { return omega_; }

 private:
  std::size_t step_;
  double omega_;
};

class Divergence : public Error {
 public:
  Divergence(const std::string& what, std::size_t step,
             std::optional<std::size_t> particle = std::nullopt)
      : Error(ErrorCode::kDivergence, what), step_(step), particle_(particle) {}

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> particle() const noexcept { return particle_; }

 private:
  std::size_t step_;
  std::optional<std::size_t> particle_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

// An experiment ran to completion but one of its checks did not hold.
class CheckFailed : public Error {
 public:
  explicit CheckFailed(const std::string& what)
      : Error(ErrorCode::kCheckFailed, what) {}
};

}  // namespace roughmf
