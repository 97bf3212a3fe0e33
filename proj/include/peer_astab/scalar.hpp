#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace peer_astab {

/// Raised when two quadratic extensions with different surds meet.
class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on malformed scalar or matrix text.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact rational number kept in lowest terms with a positive denominator.
class Rational {
 public:
  Rational() = default;
  Rational(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(long num, long den);
  Rational(const mpz_class& num, const mpz_class& den);
  explicit Rational(mpq_class q);

  const mpq_class& value() const { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sgn(q_) == 0; }
  Rational abs() const { return Rational(mpq_class(::abs(q_))); }
  Rational inverse() const;

  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const { return Rational(mpq_class(-q_)); }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  /// Nearest double; throws std::overflow_error outside the double range.
  double to_double() const;

  /// "n" or "n/d".
  std::string str() const { return q_.get_str(); }

 private:
  mpq_class q_;
};

/// Which field a method or matrix lives in.
struct FieldSpec {
  enum class Kind { rational, quadratic, float64 };

  Kind kind = Kind::rational;
  std::int64_t d = 1;  // surd for Kind::quadratic

  static FieldSpec rational() { return {}; }
  static FieldSpec quadratic(std::int64_t d);
  static FieldSpec float64() { return {Kind::float64, 1}; }

  bool exact() const { return kind != Kind::float64; }

  /// "rational", "quadratic(65)" or "float64".
  std::string str() const;
  static FieldSpec parse(std::string_view text);

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

bool is_square_free(std::int64_t d);

/// Exact element a + b*sqrt(d) of Q(sqrt(d)).
///
/// d == 1 tags a plain rational (b is then zero). Arithmetic adopts the surd of
/// whichever operand carries one; two different surds never combine and raise
/// FieldError instead. All comparisons are exact.
class Scalar {
 public:
  Scalar() = default;
  Scalar(long value) : a_(value) {}  // NOLINT(google-explicit-constructor)
  Scalar(Rational a) : a_(std::move(a)) {}  // NOLINT(google-explicit-constructor)
  Scalar(Rational a, Rational b, std::int64_t d);

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }
  std::int64_t surd() const { return d_; }
  bool is_rational() const { return b_.is_zero(); }
  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  /// Exact sign of a + b*sqrt(d).
  int sign() const;
  Scalar abs() const { return sign() < 0 ? -*this : *this; }
  Scalar inverse() const;

  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  Scalar operator-() const;

  friend bool operator==(const Scalar& x, const Scalar& y) {
    return x.a_ == y.a_ && x.b_ == y.b_ && (x.b_.is_zero() || x.d_ == y.d_);
  }
  friend std::strong_ordering operator<=>(const Scalar& x, const Scalar& y) {
    const int s = (x - y).sign();
    return s < 0 ? std::strong_ordering::less
                 : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  /// Nearest double. Not a certifying operation; validation code only.
  double to_double() const;

  /// Canonical text in the scalar grammar, e.g. "207/500+3/100*sqrt(65)".
  std::string str() const;

 private:
  std::int64_t combined_surd(const Scalar& o) const;

  Rational a_;
  Rational b_;
  std::int64_t d_ = 1;
};

inline int sign(const Scalar& x) { return x.sign(); }
inline double to_float(const Scalar& x) { return x.to_double(); }
inline std::string render(const Scalar& x) { return x.str(); }

std::ostream& operator<<(std::ostream& os, const Rational& x);
std::ostream& operator<<(std::ostream& os, const Scalar& x);

/// Parses `INT`, `INT/POSINT`, optionally followed by `+-INT/POSINT*sqrt(POSINT)`.
/// A lone surd term (`3*sqrt(65)`, `-sqrt(65)`) is accepted as well. The surd
/// must match `field`; float64 is rejected here (see parse_real).
Scalar parse_scalar(std::string_view text, const FieldSpec& field);

/// Parses a decimal float, or any expression of the exact grammar with an
/// arbitrary positive radicand, rounded to the nearest double.
double parse_real(std::string_view text);

}  // namespace peer_astab
