#include "peer_astab/scalar.hpp"

#include <mpfr.h>

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <optional>

namespace peer_astab {

namespace {

constexpr mpfr_prec_t kWorkingPrecision = 256;

// RAII holder for one MPFR variable.
class MpfrValue {
 public:
  MpfrValue() { mpfr_init2(v_, kWorkingPrecision); }
  ~MpfrValue() { mpfr_clear(v_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

double checked(double x) {
  if (std::isinf(x)) throw std::overflow_error("value exceeds the double exponent range");
  return x;
}

double quad_to_double(const mpq_class& a, const mpq_class& b, std::int64_t d) {
  if (sgn(b) == 0) {
    // mpfr_set_q is exact here, so one rounding step gives the nearest double.
    MpfrValue x;
    mpfr_set_q(x.get(), a.get_mpq_t(), MPFR_RNDN);
    return checked(mpfr_get_d(x.get(), MPFR_RNDN));
  }
  MpfrValue x;
  MpfrValue root;
  mpfr_set_q(x.get(), a.get_mpq_t(), MPFR_RNDN);
  mpfr_set_si(root.get(), static_cast<long>(d), MPFR_RNDN);
  mpfr_sqrt(root.get(), root.get(), MPFR_RNDN);
  mpfr_mul_q(root.get(), root.get(), b.get_mpq_t(), MPFR_RNDN);
  mpfr_add(x.get(), x.get(), root.get(), MPFR_RNDN);
  return checked(mpfr_get_d(x.get(), MPFR_RNDN));
}

// ---- scalar grammar -------------------------------------------------------

struct Term {
  mpq_class coeff;
  std::optional<std::int64_t> radicand;
};

class TermReader {
 public:
  explicit TermReader(std::string_view text) : text_(text) {}

  bool done() const { return pos_ == text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("malformed scalar '" + std::string(text_) + "': " + what);
  }

  // [sign] ( INT [/POSINT] [*sqrt(POSINT)] | sqrt(POSINT) )
  Term term(bool sign_required) {
    int s = 1;
    if (peek() == '+' || peek() == '-') {
      s = peek() == '-' ? -1 : 1;
      ++pos_;
    } else if (sign_required) {
      fail("expected '+' or '-'");
    }
    Term t;
    if (starts_with("sqrt(")) {
      t.coeff = 1;
      t.radicand = radicand();
    } else {
      mpz_class num = integer();
      mpz_class den = 1;
      if (peek() == '/') {
        ++pos_;
        den = integer();
        if (den == 0) fail("zero denominator");
      }
      t.coeff = mpq_class(num, den);
      t.coeff.canonicalize();
      if (peek() == '*') {
        ++pos_;
        if (!starts_with("sqrt(")) fail("expected sqrt(...) after '*'");
        t.radicand = radicand();
      }
    }
    if (s < 0) t.coeff = -t.coeff;
    return t;
  }

 private:
  bool starts_with(std::string_view prefix) const {
    return text_.substr(pos_, prefix.size()) == prefix;
  }

  mpz_class integer() {
    const std::size_t start = pos_;
    while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (pos_ == start) fail("expected digits");
    return mpz_class(std::string(text_.substr(start, pos_ - start)));
  }

  std::int64_t radicand() {
    pos_ += 5;  // "sqrt("
    const mpz_class r = integer();
    if (peek() != ')') fail("expected ')'");
    ++pos_;
    if (r <= 0 || !r.fits_slong_p()) fail("radicand out of range");
    return r.get_si();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string strip_spaces(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

// Splits text into rational part and optional surd term.
struct ParsedQuad {
  mpq_class a;
  mpq_class b;
  std::int64_t d = 1;
};

ParsedQuad parse_quad(std::string_view raw) {
  const std::string text = strip_spaces(raw);
  if (text.empty()) throw ParseError("empty scalar");
  TermReader reader(text);
  ParsedQuad out;
  Term first = reader.term(false);
  if (first.radicand) {
    out.b = first.coeff;
    out.d = *first.radicand;
  } else {
    out.a = first.coeff;
  }
  if (!reader.done()) {
    Term second = reader.term(true);
    if (!second.radicand || first.radicand) reader.fail("expected one rational and one surd term");
    out.b = second.coeff;
    out.d = *second.radicand;
  }
  if (!reader.done()) reader.fail("trailing characters");
  return out;
}

}  // namespace

// ---- Rational -------------------------------------------------------------

Rational::Rational(long num, long den) : q_(num, den) {
  if (den == 0) throw std::domain_error("zero denominator");
  q_.canonicalize();
}

Rational::Rational(const mpz_class& num, const mpz_class& den) : q_(num, den) {
  if (den == 0) throw std::domain_error("zero denominator");
  q_.canonicalize();
}

Rational::Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

Rational Rational::inverse() const {
  if (is_zero()) throw std::domain_error("inverse of zero");
  return Rational(mpq_class(1 / q_));
}

Rational& Rational::operator+=(const Rational& o) {
  q_ += o.q_;
  return *this;
}
Rational& Rational::operator-=(const Rational& o) {
  q_ -= o.q_;
  return *this;
}
Rational& Rational::operator*=(const Rational& o) {
  q_ *= o.q_;
  return *this;
}
Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::domain_error("division by zero");
  q_ /= o.q_;
  return *this;
}

double Rational::to_double() const { return quad_to_double(q_, 0, 1); }

std::ostream& operator<<(std::ostream& os, const Rational& x) { return os << x.str(); }

// ---- FieldSpec ------------------------------------------------------------

bool is_square_free(std::int64_t d) {
  if (d < 2) return false;
  for (std::int64_t p = 2; p * p <= d; ++p) {
    if (d % (p * p) == 0) return false;
  }
  return true;
}

FieldSpec FieldSpec::quadratic(std::int64_t d) {
  if (!is_square_free(d))
    throw FieldError("quadratic field needs a square-free d >= 2, got " + std::to_string(d));
  return {Kind::quadratic, d};
}

std::string FieldSpec::str() const {
  switch (kind) {
    case Kind::rational: return "rational";
    case Kind::quadratic: return "quadratic(" + std::to_string(d) + ")";
    case Kind::float64: return "float64";
  }
  return "?";
}

FieldSpec FieldSpec::parse(std::string_view raw) {
  const std::string text = strip_spaces(raw);
  if (text == "rational") return rational();
  if (text == "float64") return float64();
  constexpr std::string_view prefix = "quadratic(";
  if (text.size() > prefix.size() + 1 && text.compare(0, prefix.size(), prefix) == 0 &&
      text.back() == ')') {
    const std::string digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    char* end = nullptr;
    errno = 0;
    const long long d = std::strtoll(digits.c_str(), &end, 10);
    if (errno != 0 || end == digits.c_str() || *end != '\0')
      throw ParseError("malformed field spec '" + text + "'");
    return quadratic(d);
  }
  throw ParseError("unknown field spec '" + text + "'");
}

// ---- Scalar ---------------------------------------------------------------

Scalar::Scalar(Rational a, Rational b, std::int64_t d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
  if (d_ == 1) {
    if (!b_.is_zero()) throw FieldError("surd part requires d >= 2");
  } else if (!is_square_free(d_)) {
    throw FieldError("surd " + std::to_string(d_) + " is not square-free");
  }
}

std::int64_t Scalar::combined_surd(const Scalar& o) const {
  if (d_ == o.d_ || o.d_ == 1) return d_;
  if (d_ == 1) return o.d_;
  throw FieldError("cannot combine sqrt(" + std::to_string(d_) + ") with sqrt(" +
                   std::to_string(o.d_) + ")");
}

int Scalar::sign() const {
  const int sa = a_.sign();
  const int sb = b_.sign();
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  // Opposite signs: the term with the larger square wins.
  const mpq_class a2 = a_.value() * a_.value();
  const mpq_class b2d = b_.value() * b_.value() * static_cast<long>(d_);
  const int c = cmp(a2, b2d);
  if (c > 0) return sa;
  if (c < 0) return sb;
  return 0;
}

Scalar Scalar::operator-() const {
  Scalar r = *this;
  r.a_ = -a_;
  r.b_ = -b_;
  return r;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  d_ = combined_surd(o);
  a_ += o.a_;
  if (!o.b_.is_zero()) b_ += o.b_;
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
  d_ = combined_surd(o);
  a_ -= o.a_;
  if (!o.b_.is_zero()) b_ -= o.b_;
  return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
  const std::int64_t d = combined_surd(o);
  if (b_.is_zero() && o.b_.is_zero()) {
    a_ *= o.a_;
  } else {
    Rational a = a_ * o.a_ + b_ * o.b_ * Rational(static_cast<long>(d));
    Rational b = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(a);
    b_ = std::move(b);
  }
  d_ = d;
  return *this;
}

Scalar Scalar::inverse() const {
  if (is_zero()) throw std::domain_error("inverse of zero");
  if (b_.is_zero()) {
    Scalar r = *this;
    r.a_ = a_.inverse();
    return r;
  }
  // (a - b sqrt d) / (a^2 - b^2 d); the norm is nonzero for square-free d.
  const Rational norm = a_ * a_ - b_ * b_ * Rational(static_cast<long>(d_));
  Scalar r;
  r.a_ = a_ / norm;
  r.b_ = -b_ / norm;
  r.d_ = d_;
  return r;
}

Scalar& Scalar::operator/=(const Scalar& o) {
  if (o.b_.is_zero()) {
    d_ = combined_surd(o);
    a_ /= o.a_;
    if (!b_.is_zero()) b_ /= o.a_;
    return *this;
  }
  return *this *= o.inverse();
}

double Scalar::to_double() const { return quad_to_double(a_.value(), b_.value(), d_); }

std::string Scalar::str() const {
  if (b_.is_zero()) return a_.str();
  const std::string surd = "*sqrt(" + std::to_string(d_) + ")";
  if (a_.is_zero()) return b_.str() + surd;
  return a_.str() + (b_.sign() > 0 ? "+" : "") + b_.str() + surd;
}

std::ostream& operator<<(std::ostream& os, const Scalar& x) { return os << x.str(); }

Scalar parse_scalar(std::string_view text, const FieldSpec& field) {
  if (!field.exact()) throw ParseError("parse_scalar needs an exact field; use parse_real");
  ParsedQuad q = parse_quad(text);
  if (sgn(q.b) == 0) return Scalar(Rational(q.a));
  if (field.kind != FieldSpec::Kind::quadratic)
    throw FieldError("surd term in '" + std::string(text) + "' but field is " + field.str());
  if (q.d != field.d)
    throw FieldError("sqrt(" + std::to_string(q.d) + ") in '" + std::string(text) +
                     "' does not match field " + field.str());
  return Scalar(Rational(q.a), Rational(q.b), q.d);
}

double parse_real(std::string_view raw) {
  const std::string text = strip_spaces(raw);
  if (text.find('e') == std::string::npos && text.find('E') == std::string::npos &&
      text.find('.') == std::string::npos) {
    try {
      ParsedQuad q = parse_quad(text);
      return quad_to_double(q.a, q.b, q.d);
    } catch (const ParseError&) {
      // not the exact grammar; try the decimal reader
    }
  }
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    throw ParseError("malformed real '" + text + "'");
  if (!std::isfinite(v)) throw std::overflow_error("real out of range: " + text);
  return v;
}

}  // namespace peer_astab
