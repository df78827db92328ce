#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ueq {

// Every library error derives from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Unit system / spec problems. The CLI maps these to exit code 2.
class UnitsError : public Error {
public:
  using Error::Error;
};

class UnknownUnit : public UnitsError {
public:
  explicit UnknownUnit(const std::string& name)
      : UnitsError("unknown unit '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

class MalformedExponent : public UnitsError {
public:
  explicit MalformedExponent(const std::string& token)
      : UnitsError("malformed exponent in '" + token + "'") {}
};

class UnitMismatch : public UnitsError {
public:
  UnitMismatch(const std::string& lhs, const std::string& rhs)
      : UnitsError("unit mismatch: [" + lhs + "] vs [" + rhs + "]") {}
};

class DuplicateName : public UnitsError {
public:
  explicit DuplicateName(const std::string& name)
      : UnitsError("duplicate name '" + name + "'") {}
};

class SpecError : public UnitsError {
public:
  using UnitsError::UnitsError;
};

class IntegerOverflow : public Error {
public:
  explicit IntegerOverflow(const std::string& where)
      : Error("integer overflow in " + where) {}
};

class DivisionByZero : public Error {
public:
  DivisionByZero() : Error("division by zero") {}
};

// Numerical/data problems. The CLI maps these to exit code 3.
class DataError : public Error {
public:
  using Error::Error;
};

class PoleAtZero : public DataError {
public:
  explicit PoleAtZero(std::size_t feature)
      : DataError("zero value raised to a negative power at feature " +
                  std::to_string(feature)),
        feature_(feature) {}
  std::size_t feature() const noexcept { return feature_; }

private:
  std::size_t feature_;
};

class NonFinite : public DataError {
public:
  NonFinite() : DataError("monomial evaluated to a non-finite value") {}
  explicit NonFinite(const std::string& what) : DataError(what) {}
};

// Carries the (row, column) of a failed design-matrix entry.
class DesignMatrixError : public DataError {
public:
  DesignMatrixError(std::size_t row, std::size_t col, const std::string& cause)
      : DataError("design matrix entry (" + std::to_string(row) + ", " +
                  std::to_string(col) + "): " + cause),
        row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

private:
  std::size_t row_, col_;
};

class EnumerationTooLarge : public DataError {
public:
  EnumerationTooLarge(double candidates, double cap)
      : DataError("enumeration of " + std::to_string(candidates) +
                  " candidates exceeds cap " + std::to_string(cap)) {}
};

class EmptyEnsemble : public DataError {
public:
  EmptyEnsemble() : DataError("ensemble has no members") {}
};

class ZeroScale : public DataError {
public:
  ZeroScale() : DataError("loss scale is zero") {}
};

class BothZero : public DataError {
public:
  BothZero() : DataError("state relative error undefined: both states are zero") {}
};

class NonPositiveMass : public DataError {
public:
  NonPositiveMass() : DataError("mass must be positive") {}
};

class NumericalBlowup : public DataError {
public:
  explicit NumericalBlowup(long step)
      : DataError("integration blew up at step " + std::to_string(step)), step_(step) {}
  long step() const noexcept { return step_; }

private:
  long step_;
};

class InsufficientSurvivors : public DataError {
public:
  InsufficientSurvivors(std::size_t got, std::size_t wanted)
      : DataError("only " + std::to_string(got) + " surviving runs, needed " +
                  std::to_string(wanted)) {}
};

}  // namespace ueq
