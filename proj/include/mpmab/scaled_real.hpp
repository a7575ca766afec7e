#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mpmab {

// Nonnegative real stored as mantissa * 2^exp2 with mantissa in [1,2) or
// exactly 0. The exploration-weight recurrences multiply hundreds of terms
// like exp(-eta * cum_est) whose product leaves double range long before the
// normalized quantities (sampling probabilities, marginals) stop being
// ordinary numbers; carrying the exponent separately keeps every
// intermediate finite.
class ScaledReal {
 public:
  ScaledReal() = default;  // zero

  static ScaledReal from_double(double v) {
    ScaledReal r;
    if (v > 0.0) {
      int e = 0;
      r.mantissa_ = 2.0 * std::frexp(v, &e);  // frexp mantissa is in [0.5,1)
      r.exp2_ = e - 1;
    }
    return r;
  }

  // e^x for any finite x, including x far below log(DBL_MIN); -infinity
  // gives exact zero.
  static ScaledReal from_log(double natural_log) {
    ScaledReal r;
    if (!(natural_log >= -std::numeric_limits<double>::max())) return r;
    const double q = natural_log * 1.4426950408889634;  // log2(e)
    const double e = std::floor(q);
    r.mantissa_ = std::exp2(q - e);
    if (r.mantissa_ >= 2.0) {  // q - e can round to 1.0
      r.mantissa_ *= 0.5;
      r.exp2_ = static_cast<std::int64_t>(e) + 1;
    } else {
      r.exp2_ = static_cast<std::int64_t>(e);
    }
    return r;
  }

  static ScaledReal one() { return from_double(1.0); }

  bool is_zero() const { return mantissa_ == 0.0; }

  ScaledReal operator+(const ScaledReal& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    const ScaledReal& hi = exp2_ >= o.exp2_ ? *this : o;
    const ScaledReal& lo = exp2_ >= o.exp2_ ? o : *this;
    const std::int64_t d = hi.exp2_ - lo.exp2_;
    if (d > 1075) return hi;  // below one ulp of the larger term
    ScaledReal r;
    r.mantissa_ = hi.mantissa_ + std::ldexp(lo.mantissa_, -static_cast<int>(d));
    r.exp2_ = hi.exp2_;
    r.normalize();
    return r;
  }

  ScaledReal operator*(const ScaledReal& o) const {
    if (is_zero() || o.is_zero()) return {};
    ScaledReal r;
    r.mantissa_ = mantissa_ * o.mantissa_;
    r.exp2_ = exp2_ + o.exp2_;
    r.normalize();
    return r;
  }

  // this / denom as a plain double, saturating instead of over/underflowing.
  // denom must be nonzero.
  double ratio(const ScaledReal& denom) const {
    if (is_zero()) return 0.0;
    const double m = mantissa_ / denom.mantissa_;
    const std::int64_t e = exp2_ - denom.exp2_;
    return saturated_ldexp(m, e);
  }

  double to_double() const {
    if (is_zero()) return 0.0;
    return saturated_ldexp(mantissa_, exp2_);
  }

  double log() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    return std::log(mantissa_) + 0.6931471805599453 * static_cast<double>(exp2_);
  }

 private:
  void normalize() {
    if (mantissa_ == 0.0) {
      exp2_ = 0;
      return;
    }
    int e = 0;
    mantissa_ = 2.0 * std::frexp(mantissa_, &e);
    exp2_ += e - 1;
  }

  static double saturated_ldexp(double m, std::int64_t e) {
    if (e > 1100) return std::numeric_limits<double>::max();
    if (e < -1100) return 0.0;
    return std::ldexp(m, static_cast<int>(e));
  }

  double mantissa_ = 0.0;
  std::int64_t exp2_ = 0;
};

}  // namespace mpmab
