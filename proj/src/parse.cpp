#include <cctype>
#include <charconv>
#include <cmath>

#include "hypclass/error.hpp"
#include "hypclass/expr.hpp"

namespace hypclass {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx) : s_(text), ctx_(ctx) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ < s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view s_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        e = e / unary();
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      skip_ws();
      std::size_t at = pos_;
      Expr ex = exponent_operand();
      if (!ex.is_constant()) fail("exponent must be a constant nonnegative integer", at);
      double v = ex.value();
      if (v < 0.0 || v != std::floor(v) || v > 1e6)
        fail("exponent must be a constant nonnegative integer", at);
      return pow(base, static_cast<int>(v));
    }
    return base;
  }

  // Exponents bind tighter than unary minus on the left: x^2^3 = x^(2^3).
  Expr exponent_operand() {
    if (accept('-')) return -exponent_operand();
    return power();
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) fail("malformed number", start);
    return Expr(v);
  }

  static bool all_digits(std::string_view t) {
    if (t.empty()) return false;
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name(s_.substr(start, pos_ - start));

    if (name == "sqrt") {
      expect('(');
      Expr e = expression();
      expect(')');
      return sqrt(e);
    }
    auto pit = ctx_.params.find(name);
    if (pit != ctx_.params.end()) return Expr(pit->second);

    if (name == "xn" || name == "xin") {
      if (ctx_.n < 0) fail("alias '" + name + "' needs the dimension n", start);
      return name == "xn" ? Expr::x(ctx_.n) : Expr::xi(ctx_.n);
    }
    std::string_view rest;
    bool is_xi = false;
    if (name.size() > 2 && name.compare(0, 2, "xi") == 0 && all_digits(std::string_view(name).substr(2))) {
      is_xi = true;
      rest = std::string_view(name).substr(2);
    } else if (name.size() > 1 && name[0] == 'x' && all_digits(std::string_view(name).substr(1))) {
      rest = std::string_view(name).substr(1);
    } else {
      fail("unknown identifier '" + name + "'", start);
    }
    int idx = 0;
    auto res = std::from_chars(rest.data(), rest.data() + rest.size(), idx);
    if (res.ec != std::errc()) fail("variable index out of range", start);
    if (ctx_.n >= 0 && idx > ctx_.n)
      fail("variable '" + name + "' exceeds dimension n=" + std::to_string(ctx_.n), start);
    return is_xi ? Expr::xi(idx) : Expr::x(idx);
  }
};

}  // namespace

Expr parse(std::string_view text, const ParseContext& ctx) { return Parser(text, ctx).run(); }

}  // namespace hypclass
