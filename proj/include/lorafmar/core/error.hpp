#pragma once

#include <stdexcept>
#include <string>

namespace lorafmar {

// Scenario text could not be parsed (syntax, missing unit, bad type).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario parsed but is inconsistent (unknown ids, capacity, frequencies).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Analytic parameters outside the regime where the model holds.
class ModelRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace lorafmar
