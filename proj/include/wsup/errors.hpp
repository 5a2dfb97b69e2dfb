#pragma once

#include <stdexcept>
#include <string>

namespace wsup {

/// Parameter outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical routine did not reach its tolerance. Carries the best estimate.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double best_estimate, double error_estimate)
      : std::runtime_error(what), best_(best_estimate), err_(error_estimate) {}

  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double best_;
  double err_;
};

/// Covariance could not be factorized by any available method.
class simulation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class insufficient_data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw domain_error(msg);
}

}  // namespace detail
}  // namespace wsup
