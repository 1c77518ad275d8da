#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace levychan::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// x*ln(x) with the 0*ln(0) = 0 convention.
inline double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

inline bool is_integer_valued(double y) {
  return std::isfinite(y) && y == std::floor(y);
}

// Compensated (Kahan) accumulator.
class KahanSum {
 public:
  void add(double term) {
    const double t = sum_ + term;
    if (std::abs(sum_) >= std::abs(term)) {
      comp_ += (sum_ - t) + term;
    } else {
      comp_ += (term - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log_sum_exp(std::span<const double> logs) {
  double m = -kInf;
  for (double v : logs) m = std::max(m, v);
  if (!std::isfinite(m)) return m;  // all -inf (or a +inf slipped in)
  double s = 0.0;
  for (double v : logs) s += std::exp(v - m);
  return m + std::log(s);
}

inline double log_sum_exp(double a, double b) {
  const double logs[2] = {a, b};
  return log_sum_exp(std::span<const double>(logs, 2));
}

// ln of the regularized lower incomplete gamma P(s, u) given ln u, via the
// ascending series; requires u < s + 1 (the only regime the library needs:
// deep lower tails of Gamma output laws at extreme shape parameters).
inline double log_lower_gamma_reg(double s, double log_u) {
  const double u = std::exp(log_u);
  if (!(u < s + 1.0)) {
    throw std::domain_error("log_lower_gamma_reg: outside series regime");
  }
  // P(s,u) = u^s e^{-u} / Gamma(s+1) * sum_n u^n s! / (s+n)!
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 500; ++n) {
    term *= u / (s + n);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return s * log_u - u - std::lgamma(s + 1.0) + std::log(sum);
}

// FNV-1a, used to give suite reports a stable configuration fingerprint.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace levychan::detail
