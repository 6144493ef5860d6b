#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace oseen_rotor {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline const Vec3 kE1{1.0, 0.0, 0.0};

// Error hierarchy. Every library failure derives from Error so callers (the
// CLI in particular) can map one catch clause to one exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularPointError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DivergentIntegralError : public Error {
 public:
  using Error::Error;
};

/// Raised when an adaptive rule runs out of subdivisions. Carries the best
/// estimate reached so far.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, Mat3 best, double error)
      : Error(what), best_(std::move(best)), error_(error) {}
  const Mat3& best_estimate() const { return best_; }
  double error_estimate() const { return error_; }

 private:
  Mat3 best_;
  double error_;
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }
inline bool all_finite(const Mat3& m) { return m.allFinite(); }

}  // namespace oseen_rotor
