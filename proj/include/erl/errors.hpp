#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erl {

/// A parameter or argument outside its mathematical domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The postselection amplitude (or probability) vanishes.
class DegeneratePostselection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on a linear functional with zero variance.
class SingularConditioning : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Covariance could not be factored for sampling.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few Monte Carlo points landed in the postselection window.
class InsufficientAcceptance : public std::runtime_error {
 public:
  InsufficientAcceptance(std::size_t accepted, double acceptance_rate)
      : std::runtime_error("insufficient acceptance: " + std::to_string(accepted) +
                           " accepted points (rate " + std::to_string(acceptance_rate) + ")"),
        accepted_(accepted),
        acceptance_rate_(acceptance_rate) {}

  std::size_t accepted() const noexcept { return accepted_; }
  double acceptance_rate() const noexcept { return acceptance_rate_; }

 private:
  std::size_t accepted_;
  double acceptance_rate_;
};

}  // namespace erl
