#pragma once

#include <stdexcept>
#include <string>

namespace magpc {

// Base of every error the library throws. `exit_code()` is the CLI mapping.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 3; }
};

// Shapes that do not line up. `agent()` is -1 when no agent is involved.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, int agent = -1)
      : Error(agent >= 0 ? what + " (agent " + std::to_string(agent) + ")"
                         : what),
        agent_(agent) {}
  int agent() const { return agent_; }

 private:
  int agent_;
};

// An agent asked for information its information setting does not grant, or
// was called out of order.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int round)
      : Error(what + " at round " + std::to_string(round)), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

// Closed loop with spectral radius >= 1.
class NotStabilizingError : public Error {
 public:
  NotStabilizingError(const std::string& what, double spectral_radius)
      : Error(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

// Eigenbasis too ill-conditioned to certify.
class DefectiveMatrixError : public Error {
 public:
  DefectiveMatrixError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace magpc
