#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plateau {

// An exponent p in [1, inf], stored exactly as a rational num/den or as
// infinity.  Conjugation 1/p + 1/q = 1 is exact, including 1 <-> inf,
// so constants like k^{1-1/p} never drift.
class Exponent {
 public:
  Exponent() : num_(2), den_(1), inf_(false) {}

  static Exponent infinity() {
    Exponent e;
    e.inf_ = true;
    e.num_ = 0;
    e.den_ = 1;
    return e;
  }

  static Exponent rational(std::int64_t num, std::int64_t den) {
    if (den <= 0 || num <= 0) throw std::invalid_argument("Exponent: p must be positive");
    std::int64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    if (num < den) throw std::invalid_argument("Exponent: p must be >= 1");
    Exponent e;
    e.num_ = num;
    e.den_ = den;
    e.inf_ = false;
    return e;
  }

  static Exponent from_double(double p) {
    if (std::isinf(p)) return infinity();
    if (!(p >= 1.0)) throw std::invalid_argument("Exponent: p must be >= 1");
    // decimal literals up to 6 places are represented exactly
    std::int64_t den = 1000000;
    std::int64_t num = std::llround(p * static_cast<double>(den));
    return rational(num, den);
  }

  // accepts "inf", "infinity", a decimal, or "a/b"
  static Exponent parse(const std::string& s) {
    if (s == "inf" || s == "Inf" || s == "INF" || s == "infinity") return infinity();
    auto slash = s.find('/');
    if (slash != std::string::npos)
      return rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    return from_double(std::stod(s));
  }

  bool is_inf() const { return inf_; }
  bool is_one() const { return !inf_ && num_ == den_; }
  bool is_two() const { return !inf_ && num_ == 2 * den_; }

  double value() const {
    if (inf_) return std::numeric_limits<double>::infinity();
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  Exponent conjugate() const {
    if (inf_) return rational(1, 1);
    if (is_one()) return infinity();
    // q = p/(p-1) = num / (num - den)
    return rational(num_, num_ - den_);
  }

  // k^{1 - 1/p}, exact at the endpoints (k^0 = 1 for p=1, k for p=inf)
  double k_factor(int k) const {
    if (inf_) return static_cast<double>(k);
    if (is_one()) return 1.0;
    double e = 1.0 - static_cast<double>(den_) / static_cast<double>(num_);
    return std::pow(static_cast<double>(k), e);
  }

  // k^{1/p}
  double k_root(int k) const {
    if (inf_) return 1.0;
    return std::pow(static_cast<double>(k), static_cast<double>(den_) / static_cast<double>(num_));
  }

  bool operator==(const Exponent& o) const {
    return inf_ == o.inf_ && num_ == o.num_ && den_ == o.den_;
  }
  bool operator<(const Exponent& o) const {
    if (inf_) return false;
    if (o.inf_) return true;
    return num_ * o.den_ < o.num_ * den_;
  }

  std::string str() const {
    if (inf_) return "inf";
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  std::int64_t num_, den_;
  bool inf_;
};

}  // namespace plateau
