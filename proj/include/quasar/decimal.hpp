#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "quasar/text.hpp"

namespace quasar {

// Exact rational number with int64 numerator/denominator. All arithmetic is
// exact; anything that would leave the representable range throws
// std::overflow_error instead of silently losing precision.
class Decimal {
 public:
  Decimal() : num_(0), den_(1) {}
  Decimal(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit by design
  Decimal(std::int64_t numerator, std::int64_t denominator) : num_(numerator), den_(denominator) {
    normalize();
  }

  static Decimal parse(std::string_view text) {
    std::string_view s = trim_view(text);
    if (s.empty()) throw std::invalid_argument("empty number");
    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    std::int64_t int_part = 0;
    size_t i = 0;
    size_t int_digits = 0;
    for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i, ++int_digits) {
      int_part = checked(static_cast<__int128>(int_part) * 10 + (s[i] - '0'));
    }
    if (int_digits == 0) throw std::invalid_argument("malformed number: " + std::string(text));
    if (i < s.size() && s[i] == '/') {
      ++i;
      std::int64_t den = 0;
      size_t den_digits = 0;
      for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i, ++den_digits) {
        den = checked(static_cast<__int128>(den) * 10 + (s[i] - '0'));
      }
      if (den_digits == 0 || i != s.size()) {
        throw std::invalid_argument("malformed fraction: " + std::string(text));
      }
      return Decimal(negative ? -int_part : int_part, den);
    }
    std::int64_t num = int_part;
    std::int64_t den = 1;
    if (i < s.size() && s[i] == '.') {
      ++i;
      for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) {
        num = checked(static_cast<__int128>(num) * 10 + (s[i] - '0'));
        den = checked(static_cast<__int128>(den) * 10);
      }
    }
    if (i != s.size()) throw std::invalid_argument("malformed number: " + std::string(text));
    return Decimal(negative ? -num : num, den);
  }

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_negative() const { return num_ < 0; }

  Decimal operator-() const { return Decimal(checked(-static_cast<__int128>(num_)), den_); }

  friend Decimal operator+(const Decimal& a, const Decimal& b) {
    __int128 num = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
    __int128 den = static_cast<__int128>(a.den_) * b.den_;
    return from_wide(num, den);
  }
  friend Decimal operator-(const Decimal& a, const Decimal& b) { return a + (-b); }
  friend Decimal operator*(const Decimal& a, const Decimal& b) {
    __int128 num = static_cast<__int128>(a.num_) * b.num_;
    __int128 den = static_cast<__int128>(a.den_) * b.den_;
    return from_wide(num, den);
  }
  friend Decimal operator/(const Decimal& a, const Decimal& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero");
    __int128 num = static_cast<__int128>(a.num_) * b.den_;
    __int128 den = static_cast<__int128>(a.den_) * b.num_;
    return from_wide(num, den);
  }
  // Remainder; defined for integer operands only.
  friend Decimal operator%(const Decimal& a, const Decimal& b) {
    if (!a.is_integer() || !b.is_integer()) throw std::domain_error("modulo of non-integers");
    if (b.num_ == 0) throw std::domain_error("modulo by zero");
    return Decimal(a.num_ % b.num_);
  }

  Decimal pow_int(std::int64_t exponent) const {
    if (exponent < -64 || exponent > 64) throw std::domain_error("exponent out of range");
    if (exponent == 0) return Decimal(1);
    Decimal base = *this;
    if (exponent < 0) {
      if (num_ == 0) throw std::domain_error("zero to a negative power");
      base = Decimal(1) / base;
      exponent = -exponent;
    }
    Decimal result(1);
    for (std::int64_t i = 0; i < exponent; ++i) result = result * base;
    return result;
  }

  Decimal abs() const { return num_ < 0 ? -*this : *this; }

  Decimal floor() const {
    if (den_ == 1) return *this;
    std::int64_t q = num_ / den_;
    if (num_ < 0) --q;
    return Decimal(q);
  }

  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Decimal& a, const Decimal& b) { return !(a == b); }
  friend bool operator<(const Decimal& a, const Decimal& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator>(const Decimal& a, const Decimal& b) { return b < a; }
  friend bool operator<=(const Decimal& a, const Decimal& b) { return !(b < a); }
  friend bool operator>=(const Decimal& a, const Decimal& b) { return !(a < b); }

  // Minimal exact decimal string ("210", "0.25", "-1.2"). Values whose
  // denominator has prime factors other than 2 and 5 have no finite decimal
  // form and render as a fraction ("1/3").
  std::string to_string() const {
    std::int64_t d = den_;
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    if (d != 1) {
      return std::to_string(num_) + "/" + std::to_string(den_);
    }
    std::string out;
    std::int64_t n = num_;
    if (n < 0) out.push_back('-');
    __int128 an = n < 0 ? -static_cast<__int128>(n) : static_cast<__int128>(n);
    out += wide_to_string(an / den_);
    __int128 rem = an % den_;
    if (rem != 0) {
      out.push_back('.');
      while (rem != 0) {
        rem *= 10;
        out.push_back(static_cast<char>('0' + static_cast<int>(rem / den_)));
        rem %= den_;
      }
    }
    return out;
  }

  // Fixed-point string with exactly `places` fraction digits, rounding
  // half away from zero.
  std::string to_fixed(int places) const {
    if (places < 0 || places > 18) throw std::invalid_argument("places out of range");
    __int128 scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    __int128 scaled = static_cast<__int128>(num_) * scale;
    __int128 q = scaled / den_;
    __int128 r = scaled % den_;
    if (r < 0) r = -r;
    if (2 * r >= den_) q += (num_ < 0) ? -1 : 1;
    bool negative = q < 0;
    if (q < 0) q = -q;
    std::string digits = wide_to_string(q);
    if (static_cast<int>(digits.size()) <= places) {
      digits.insert(0, places + 1 - digits.size(), '0');
    }
    std::string out;
    if (negative) out.push_back('-');
    out.append(digits, 0, digits.size() - places);
    if (places > 0) {
      out.push_back('.');
      out.append(digits, digits.size() - places, places);
    }
    return out;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

 private:
  static std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("decimal overflow");
    return static_cast<std::int64_t>(v);
  }

  static Decimal from_wide(__int128 num, __int128 den) {
    if (den == 0) throw std::domain_error("division by zero");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 g = wide_gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    Decimal d;
    d.num_ = checked(num);
    d.den_ = checked(den);
    return d;
  }

  static __int128 wide_gcd(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  static std::string wide_to_string(__int128 v) {
    if (v == 0) return "0";
    std::string out;
    bool negative = v < 0;
    while (v != 0) {
      int digit = static_cast<int>(negative ? -(v % 10) : (v % 10));
      out.push_back(static_cast<char>('0' + digit));
      v /= 10;
    }
    if (negative) out.push_back('-');
    return std::string(out.rbegin(), out.rend());
  }

  void normalize() {
    if (den_ == 0) throw std::domain_error("zero denominator");
    __int128 n = num_;
    __int128 d = den_;
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = wide_gcd(n < 0 ? -n : n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    num_ = checked(n);
    den_ = checked(d);
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace quasar
