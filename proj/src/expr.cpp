#include "nsbf/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace nsbf {

ParseError::ParseError(const std::string& message, std::size_t position)
    : ConfigError(message + " at position " + std::to_string(position)), position_(position) {}

enum class NodeKind { literal, variable, negate, add, sub, mul, div, pow, call };
enum class Func { sin, cos, tan, exp, log, sqrt, abs, sinh, cosh, tanh, sech };

struct Expr::Node {
  NodeKind kind;
  cplx value{};
  Func func{};
  std::string text;  // literal or constant spelling, for printing
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct FuncName {
  std::string_view name;
  Func func;
};

constexpr FuncName kFunctions[] = {
    {"sin", Func::sin},   {"cos", Func::cos},   {"tan", Func::tan},   {"exp", Func::exp},
    {"log", Func::log},   {"sqrt", Func::sqrt}, {"abs", Func::abs},   {"sinh", Func::sinh},
    {"cosh", Func::cosh}, {"tanh", Func::tanh}, {"sech", Func::sech},
};

std::string_view func_name(Func f) {
  for (const auto& fn : kFunctions)
    if (fn.func == f) return fn.name;
  return "?";
}

NodePtr make_leaf(NodeKind kind, cplx value, std::string text) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->value = value;
  n->text = std::move(text);
  return n;
}

NodePtr make_node(NodeKind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, const std::string& variable) : text_(text), variable_(variable) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    auto root = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = make_node(NodeKind::add, lhs, parse_product());
      else if (accept('-')) lhs = make_node(NodeKind::sub, lhs, parse_product());
      else return lhs;
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make_node(NodeKind::mul, lhs, parse_unary());
      else if (accept('/')) lhs = make_node(NodeKind::div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_node(NodeKind::negate, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    // Right-associative; the exponent may carry its own sign: 2^-x.
    if (accept('^')) return make_node(NodeKind::pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) digits();
      else pos_ = save;  // "2e" is 2 followed by the constant e -> rejected below
    }
    const std::string spelling(text_.substr(start, pos_ - start));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(spelling.data(), spelling.data() + spelling.size(), v);
    if (ec != std::errc() || ptr != spelling.data() + spelling.size())
      throw ParseError("malformed number '" + spelling + "'", start);
    // Imaginary literal suffix: 4i, 2.5i.
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        (pos_ + 1 == text_.size() || !std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])))) {
      ++pos_;
      return make_leaf(NodeKind::literal, cplx(0.0, v), spelling + "i");
    }
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      throw ParseError("missing operator before identifier", pos_);
    return make_leaf(NodeKind::literal, cplx(v, 0.0), spelling);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    for (const auto& fn : kFunctions) {
      if (fn.name != name) continue;
      if (!accept('(')) throw ParseError("expected '(' after function " + name, pos_);
      auto arg = parse_sum();
      if (accept(',')) throw ParseError("function " + name + " takes one argument", pos_ - 1);
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      auto n = std::make_shared<Expr::Node>();
      n->kind = NodeKind::call;
      n->func = fn.func;
      n->lhs = std::move(arg);
      return n;
    }
    if (name == variable_) return make_leaf(NodeKind::variable, 0.0, name);
    if (name == "pi") return make_leaf(NodeKind::literal, std::numbers::pi, name);
    if (name == "e") return make_leaf(NodeKind::literal, std::numbers::e, name);
    if (name == "i") return make_leaf(NodeKind::literal, cplx(0.0, 1.0), name);
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view text_;
  const std::string& variable_;
  std::size_t pos_ = 0;
};

cplx int_pow(cplx base, long n) {
  if (n < 0) return 1.0 / int_pow(base, -n);
  cplx result = 1.0;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

cplx apply(Func f, cplx z) {
  switch (f) {
    case Func::sin: return std::sin(z);
    case Func::cos: return std::cos(z);
    case Func::tan: return std::tan(z);
    case Func::exp: return std::exp(z);
    case Func::log:
      if (z == cplx(0.0)) throw EvaluationError("log(0)");
      return std::log(z);
    case Func::sqrt: return std::sqrt(z);
    case Func::abs: return std::abs(z);
    case Func::sinh: return std::sinh(z);
    case Func::cosh: return std::cosh(z);
    case Func::tanh: return std::tanh(z);
    case Func::sech: {
      const cplx c = std::cosh(z);
      if (c == cplx(0.0)) throw EvaluationError("sech: cosh vanished");
      return 1.0 / c;
    }
  }
  return {};
}

cplx eval(const Expr::Node& n, cplx var) {
  switch (n.kind) {
    case NodeKind::literal: return n.value;
    case NodeKind::variable: return var;
    case NodeKind::negate: return -eval(*n.lhs, var);
    case NodeKind::add: return eval(*n.lhs, var) + eval(*n.rhs, var);
    case NodeKind::sub: return eval(*n.lhs, var) - eval(*n.rhs, var);
    case NodeKind::mul: return eval(*n.lhs, var) * eval(*n.rhs, var);
    case NodeKind::div: {
      const cplx d = eval(*n.rhs, var);
      if (d == cplx(0.0)) throw EvaluationError("division by zero");
      return eval(*n.lhs, var) / d;
    }
    case NodeKind::pow: {
      const cplx base = eval(*n.lhs, var);
      const cplx ex = eval(*n.rhs, var);
      if (ex.imag() == 0.0 && std::abs(ex.real()) <= 1024.0 && ex.real() == std::round(ex.real())) {
        if (base == cplx(0.0) && ex.real() < 0.0) throw EvaluationError("zero raised to a negative power");
        return int_pow(base, static_cast<long>(ex.real()));
      }
      if (base == cplx(0.0)) {
        if (ex.real() > 0.0) return 0.0;
        throw EvaluationError("zero raised to a non-positive power");
      }
      return std::pow(base, ex);
    }
    case NodeKind::call: return apply(n.func, eval(*n.lhs, var));
  }
  return {};
}

bool mentions_variable(const Expr::Node& n) {
  if (n.kind == NodeKind::variable) return true;
  return (n.lhs && mentions_variable(*n.lhs)) || (n.rhs && mentions_variable(*n.rhs));
}

void print_node(const Expr::Node& n, std::ostream& os) {
  auto binary = [&](const char* op) {
    os << '(';
    print_node(*n.lhs, os);
    os << ' ' << op << ' ';
    print_node(*n.rhs, os);
    os << ')';
  };
  switch (n.kind) {
    case NodeKind::literal:
    case NodeKind::variable: os << n.text; break;
    case NodeKind::negate:
      os << "(-";
      print_node(*n.lhs, os);
      os << ')';
      break;
    case NodeKind::add: binary("+"); break;
    case NodeKind::sub: binary("-"); break;
    case NodeKind::mul: binary("*"); break;
    case NodeKind::div: binary("/"); break;
    case NodeKind::pow: binary("^"); break;
    case NodeKind::call:
      os << func_name(n.func) << '(';
      print_node(*n.lhs, os);
      os << ')';
      break;
  }
}

}  // namespace

Expr Expr::parse(std::string_view text, std::string variable) {
  Parser p(text, variable);
  auto root = p.parse();
  return Expr(std::move(root), std::move(variable));
}

Expr Expr::constant(cplx value) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << value.real() << " + " << value.imag() << "i)";
  return parse(os.str());
}

cplx Expr::evaluate(cplx value) const {
  const cplx r = eval(*root_, value);
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
    throw EvaluationError("expression evaluated to a non-finite value");
  return r;
}

bool Expr::is_constant() const { return !mentions_variable(*root_); }

std::string Expr::print() const {
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

SampledFunction sample(const Expr& expr, const GridPtr& grid) {
  std::vector<cplx> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      v[i] = expr.evaluate(grid->node(i));
    } catch (const EvaluationError& e) {
      throw EvaluationError(std::string(e.what()) + " at node " + std::to_string(i) +
                            " (x=" + std::to_string(grid->node(i)) + ")");
    }
  }
  return SampledFunction(grid, std::move(v));
}

bool is_real_valued(const SampledFunction& sf, double tol) { return sf.max_abs_imag() < tol; }

}  // namespace nsbf
