#pragma once

#include <stdexcept>
#include <string>

namespace levychan {

// Raised when an SNR-axis integral provably diverges (e.g. relative entropy
// between mutually singular laws) or its integrand refuses to decay within
// the evaluation budget.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an expected loss is +inf: the decoder law assigns zero
// reconstruction mass where the true input requires a positive one.
class InfiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised on support violations: every prior atom has zero likelihood at an
// observed output, or an absolute-continuity precondition fails.
class SupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levychan
