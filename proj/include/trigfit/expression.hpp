#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "trigfit/error.hpp"

namespace trigfit {

/// Default distance kept from tan poles and from x = 0 for log.
inline constexpr double kDefaultGuard = 0.01;

/// One elementary function of the scalar input.
struct BaseFeature {
  enum class Kind { XPow, Sin, Cos, Tan, Log, Exp };

  Kind kind = Kind::XPow;
  int power = 1;  // only meaningful for XPow

  static BaseFeature x_pow(int k) {
    if (k < 1) throw InvalidArgument("x power must be >= 1, got " + std::to_string(k));
    return {Kind::XPow, k};
  }
  static constexpr BaseFeature sin() { return {Kind::Sin, 1}; }
  static constexpr BaseFeature cos() { return {Kind::Cos, 1}; }
  static constexpr BaseFeature tan() { return {Kind::Tan, 1}; }
  static constexpr BaseFeature log() { return {Kind::Log, 1}; }
  static constexpr BaseFeature exp() { return {Kind::Exp, 1}; }

  friend bool operator==(const BaseFeature&, const BaseFeature&) = default;

  /// Canonical token, e.g. "x", "x^3", "sin(x)".
  std::string name() const {
    switch (kind) {
      case Kind::XPow: return power == 1 ? "x" : "x^" + std::to_string(power);
      case Kind::Sin: return "sin(x)";
      case Kind::Cos: return "cos(x)";
      case Kind::Tan: return "tan(x)";
      case Kind::Log: return "log(x)";
      case Kind::Exp: return "exp(x)";
    }
    return "?";
  }

  /// Raw function value; no domain checking.
  double value(double x) const {
    switch (kind) {
      case Kind::XPow: return std::pow(x, power);
      case Kind::Sin: return std::sin(x);
      case Kind::Cos: return std::cos(x);
      case Kind::Tan: return std::tan(x);
      case Kind::Log: return std::log(x);
      case Kind::Exp: return std::exp(x);
    }
    return 0.0;
  }
};

/// Distance from x to the nearest odd multiple of pi/2.
inline double tan_pole_distance(double x) {
  constexpr double half_pi = std::numbers::pi / 2;
  const double k = std::round((x - half_pi) / std::numbers::pi);
  return std::abs(x - (half_pi + k * std::numbers::pi));
}

/// Whether `f` may be evaluated at x under the guard policy.
inline bool in_guarded_domain(const BaseFeature& f, double x, double guard) {
  switch (f.kind) {
    case BaseFeature::Kind::Log: return x > 0.0 && x >= guard;
    case BaseFeature::Kind::Tan: {
      const double d = tan_pole_distance(x);
      return d > 0.0 && d >= guard;
    }
    default: return std::isfinite(x);
  }
}

/// Throws DomainError naming the factor if x is outside its guarded domain.
inline void check_domain(const BaseFeature& f, double x, double guard) {
  if (in_guarded_domain(f, x, guard)) return;
  if (f.kind == BaseFeature::Kind::Log) throw DomainError(f.name(), x, "requires x >= guard > 0");
  if (f.kind == BaseFeature::Kind::Tan) throw DomainError(f.name(), x, "too close to a pole");
  throw DomainError(f.name(), x, "non-finite input");
}

struct Term {
  double coefficient = 1.0;
  std::vector<BaseFeature> factors;  // repetition allowed; generation order kept

  friend bool operator==(const Term&, const Term&) = default;
};

/// Sum of terms. Duplicated terms are kept as generated.
struct Expression {
  std::vector<Term> terms;

  friend bool operator==(const Expression&, const Expression&) = default;

  bool contains(BaseFeature::Kind kind) const {
    return std::ranges::any_of(terms, [kind](const Term& t) {
      return std::ranges::any_of(t.factors, [kind](const BaseFeature& f) { return f.kind == kind; });
    });
  }
};

/// Product of factor values at x, domain-checked, times `coefficient`.
inline double eval_term(const Term& term, double x, double guard = kDefaultGuard) {
  if (term.factors.empty()) throw InvalidArgument("term has no factors");
  double product = term.coefficient;
  for (const auto& f : term.factors) {
    check_domain(f, x, guard);
    product *= f.value(x);
    if (!std::isfinite(product))
      throw OverflowError("non-finite intermediate evaluating " + f.name() + " at x=" + std::to_string(x));
  }
  return product;
}

inline double eval_expression(const Expression& expr, double x, double guard = kDefaultGuard) {
  double sum = 0.0;
  for (const auto& t : expr.terms) {
    sum += eval_term(t, x, guard);
    if (!std::isfinite(sum)) throw OverflowError("expression sum overflowed at x=" + std::to_string(x));
  }
  return sum;
}

/// Merges terms whose factor multisets coincide, summing coefficients.
/// Terms are emitted in order of first appearance; factors come out sorted.
inline Expression collapse_like_terms(const Expression& expr) {
  auto key_of = [](std::vector<BaseFeature> fs) {
    std::ranges::sort(fs, [](const BaseFeature& a, const BaseFeature& b) {
      return a.kind != b.kind ? a.kind < b.kind : a.power < b.power;
    });
    return fs;
  };
  Expression out;
  std::vector<std::vector<BaseFeature>> keys;
  for (const auto& t : expr.terms) {
    auto key = key_of(t.factors);
    auto it = std::ranges::find(keys, key);
    if (it == keys.end()) {
      keys.push_back(key);
      out.terms.push_back({t.coefficient, std::move(key)});
    } else {
      out.terms[static_cast<std::size_t>(it - keys.begin())].coefficient += t.coefficient;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text form: terms joined by '+', factors by '*', optional numeric coefficient
// prefix ("95*sin(x)*cos(x)"). A coefficient of exactly 1 is omitted. The
// empty expression is "0".

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_term(const Term& t) {
  std::string s;
  if (t.coefficient != 1.0) s = format_number(t.coefficient) + "*";
  for (std::size_t i = 0; i < t.factors.size(); ++i) {
    if (i) s += '*';
    s += t.factors[i].name();
  }
  return s;
}

inline std::string format_expression(const Expression& expr) {
  if (expr.terms.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < expr.terms.size(); ++i) {
    if (i) s += '+';
    s += format_term(expr.terms[i]);
  }
  return s;
}

namespace detail {

class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) {
    src_.reserve(text.size());
    for (char c : text)
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') src_ += c;
  }

  Expression parse() {
    if (src_.starts_with("y=")) pos_ = 2;
    if (src_.substr(pos_) == "0") return {};
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    Expression e;
    e.terms.push_back(term());
    while (pos_ < src_.size()) {
      expect('+');
      e.terms.push_back(term());
    }
    return e;
  }

 private:
  Term term() {
    Term t;
    const char c = peek();
    if (c == '-' || c == '.' || (c >= '0' && c <= '9')) {
      double v = 0.0;
      const char* first = src_.data() + pos_;
      const char* last = src_.data() + src_.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{}) throw ParseError("malformed coefficient", pos_);
      pos_ += static_cast<std::size_t>(ptr - first);
      t.coefficient = v;
      expect('*');
    }
    t.factors.push_back(factor());
    while (peek() == '*') {
      ++pos_;
      t.factors.push_back(factor());
    }
    return t;
  }

  BaseFeature factor() {
    static const std::map<std::string_view, BaseFeature> kFunctions = {
        {"sin(x)", BaseFeature::sin()}, {"cos(x)", BaseFeature::cos()}, {"tan(x)", BaseFeature::tan()},
        {"log(x)", BaseFeature::log()}, {"exp(x)", BaseFeature::exp()}};
    const std::string_view rest = std::string_view(src_).substr(pos_);
    for (const auto& [token, feature] : kFunctions) {
      if (rest.starts_with(token)) {
        pos_ += token.size();
        return feature;
      }
    }
    if (peek() != 'x') throw ParseError("expected a factor", pos_);
    ++pos_;
    if (peek() != '^') return BaseFeature::x_pow(1);
    ++pos_;
    const std::size_t at = pos_;
    int k = 0;
    const char* first = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, src_.data() + src_.size(), k);
    if (ec != std::errc{} || k < 1) throw ParseError("expected a positive integer exponent", at);
    pos_ += static_cast<std::size_t>(ptr - first);
    return BaseFeature::x_pow(k);
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::string src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the canonical text form. Whitespace and a leading "y=" are ignored;
/// reported positions refer to the whitespace-stripped text.
inline Expression parse_expression(std::string_view text) { return detail::ExpressionParser(text).parse(); }

// ---------------------------------------------------------------------------
// Domains

/// Open interval (center - radius, center + radius).
struct Exclusion {
  double center = 0.0;
  double radius = 0.0;

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct DomainSpec {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<Exclusion> exclusions;

  bool contains(double x) const {
    if (!(x >= lower && x <= upper)) return false;
    return std::ranges::none_of(exclusions, [x](const Exclusion& e) { return std::abs(x - e.center) < e.radius; });
  }
};

/// Valid evaluation region of `expr` inside [lower, upper].
///
/// A log factor raises `lower` to `guard`. A tan factor excludes radius
/// `guard` around every pole; a pole whose neighbourhood straddles a bound
/// moves that bound instead, so exclusions always lie strictly inside.
inline DomainSpec domain_of(const Expression& expr, double lower, double upper, double guard = kDefaultGuard) {
  if (!(lower < upper)) throw InvalidArgument("domain requires lower < upper");
  if (!(guard > 0.0)) throw InvalidArgument("guard must be positive");
  DomainSpec d{lower, upper, {}};
  if (expr.contains(BaseFeature::Kind::Log)) d.lower = std::max(d.lower, guard);
  if (expr.contains(BaseFeature::Kind::Tan) && d.lower < d.upper) {
    constexpr double pi = std::numbers::pi;
    const double k_first = std::floor((d.lower - guard - pi / 2) / pi);
    for (double k = k_first;; k += 1.0) {
      const double c = pi / 2 + k * pi;
      if (c - guard >= d.upper) break;
      if (c + guard <= d.lower) continue;
      if (c - guard <= d.lower) {
        d.lower = c + guard;
      } else if (c + guard >= d.upper) {
        d.upper = c - guard;
      } else {
        d.exclusions.push_back({c, guard});
      }
    }
  }
  if (!(d.lower < d.upper)) throw DomainError("guarded domain is empty");
  return d;
}

/// Points lower, lower + step, ... not exceeding upper.
inline std::vector<double> make_grid(double lower, double upper, double step) {
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  if (!(lower <= upper)) throw InvalidArgument("grid requires lower <= upper");
  const auto n = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lower + static_cast<double>(i) * step;
  return xs;
}

/// Grid points of [lower, upper] that also satisfy `domain`.
inline std::vector<double> make_grid(const DomainSpec& domain, double lower, double upper, double step) {
  auto xs = make_grid(lower, upper, step);
  std::erase_if(xs, [&](double x) { return !domain.contains(x); });
  return xs;
}

}  // namespace trigfit
