#pragma once

#include <stdexcept>
#include <string>

namespace magfem {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularTensor : public Error {
 public:
  using Error::Error;
};

class NonPositiveJacobian : public Error {
 public:
  using Error::Error;
};

/// Raised when a Gent material approaches its locking stretch; the caller is
/// expected to cut the load step.
class GentLockingLimit : public Error {
 public:
  using Error::Error;
};

class ZeroCurvature : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class UnsupportedDegree : public Error {
 public:
  using Error::Error;
};

class UnsupportedRule : public Error {
 public:
  using Error::Error;
};

class LockingStretch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, double pivot, long dof)
      : Error(what), pivot_(pivot), dof_(dof) {}
  double pivot() const { return pivot_; }
  long dof() const { return dof_; }

 private:
  double pivot_;
  long dof_;
};

class DivergedNonlinear : public Error {
 public:
  DivergedNonlinear(const std::string& what, int step)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace magfem
