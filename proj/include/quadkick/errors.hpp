#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quadkick {

/// A state or map failed one of its structural invariants.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invariant failure raised while folding a state through a schedule.
class ScheduleError : public InvariantError {
 public:
  ScheduleError(std::size_t segment, const std::string& what)
      : InvariantError("segment " + std::to_string(segment) + ": " + what), segment_(segment) {}

  std::size_t segment() const noexcept { return segment_; }

 private:
  std::size_t segment_;
};

/// A physical parameter is outside its admissible range.
class ParameterError : public std::domain_error {
 public:
  ParameterError(std::string field, const std::string& what)
      : std::domain_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace quadkick
