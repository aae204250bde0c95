#pragma once

#include <stdexcept>
#include <string>

namespace reluinj {

/// An evaluator was called outside the region where its closed forms are defined
/// (negative radicand, non-positive log argument, singular closed-form input).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A quadrature integrand produced a non-finite value.
class EvaluationError : public std::runtime_error {
public:
  EvaluationError(const std::string& what, double node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

  double node() const noexcept { return node_; }

private:
  double node_;
};

/// A root search found no sign change in its bracket.
class BracketError : public std::runtime_error {
public:
  BracketError(const std::string& what, double lo_value, double hi_value)
      : std::runtime_error(what), lo_value_(lo_value), hi_value_(hi_value) {}

  double lo_value() const noexcept { return lo_value_; }
  double hi_value() const noexcept { return hi_value_; }

private:
  double lo_value_;
  double hi_value_;
};

}  // namespace reluinj
