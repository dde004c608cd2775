#pragma once

#include <stdexcept>
#include <string>

namespace pabf {

// Linear solver failed to meet its tolerance within the iteration budget.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations)
  {
  }
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

private:
  double residual_;
  int iterations_;
};

// A replica left the finite range during integration (dt too large).
class BlowupError : public std::runtime_error {
public:
  BlowupError(const std::string& what, int replica, long step)
      : std::runtime_error(what), replica_(replica), step_(step)
  {
  }
  int replica() const { return replica_; }
  long step() const { return step_; }

private:
  int replica_;
  long step_;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pabf
