#ifndef CCIDENT_ERRORS_HPP
#define CCIDENT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ccident {

/// Data that is well-formed but unusable (degenerate domains, bad CSV rows).
class InvalidData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forward integration stopped before t_max.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

/// Step size collapsed below the configured floor.
class StiffnessFailure : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// State became non-finite.
class Divergence : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(const std::string& what, long epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  long epoch() const noexcept { return epoch_; }

 private:
  long epoch_;
};

}  // namespace ccident

#endif  // CCIDENT_ERRORS_HPP
