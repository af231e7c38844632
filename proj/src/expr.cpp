#include "geq/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

#include "geq/simd.hpp"

namespace geq::expr {
namespace {

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse_all() {
    NodePtr n = sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::SyntaxError) const {
    throw ParseError(code, "parse: " + what, pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::strchr(" \t\r\n", text_[pos_]) != nullptr && text_[pos_] != '\0')
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, lhs, product());
      else if (accept('-')) lhs = make(Op::Sub, lhs, product());
      else return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    while (accept('^')) {
      skip_ws();
      const bool negative = accept('-');
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
        fail("exponent must be an integer");
      int k = 0;
      const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, k);
      if (res.ec != std::errc()) fail("exponent out of range");
      auto n = std::make_shared<Node>();
      n->op = Op::Pow;
      n->index = negative ? -k : k;
      n->lhs = base;
      base = n;
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = sum();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v,
                                     std::chars_format::general);
    if (res.ec != std::errc() || !std::isfinite(v)) fail("malformed number");
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    (void)start;
    auto n = std::make_shared<Node>();
    n->op = Op::Lit;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);
    if (id.size() >= 2 && id[0] == 'x' &&
        id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int idx = 0;
      const auto res = std::from_chars(id.data() + 1, id.data() + id.size(), idx);
      if (res.ec != std::errc() || idx >= dim_) {
        pos_ = start;
        fail("coordinate '" + std::string(id) + "' outside chart dimension " + std::to_string(dim_),
             ErrorCode::IndexOutOfRange);
      }
      auto n = std::make_shared<Node>();
      n->op = Op::Var;
      n->index = idx;
      return n;
    }
    static constexpr std::pair<const char*, Op> kFuncs[] = {
        {"exp", Op::Exp}, {"log", Op::Log}, {"sin", Op::Sin}, {"cos", Op::Cos}, {"sqrt", Op::Sqrt}};
    for (const auto& [name, op] : kFuncs) {
      if (id == name) {
        expect('(');
        NodePtr arg = sum();
        expect(')');
        return make(op, arg);
      }
    }
    pos_ = start;
    fail("unknown symbol '" + std::string(id) + "'", ErrorCode::UnknownSymbol);
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const char* func_name(Op op) {
  switch (op) {
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Sqrt: return "sqrt";
    default: return nullptr;
  }
}

bool equal(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::Lit: return a->value == b->value;
    case Op::Var: return a->index == b->index;
    case Op::Pow: return a->index == b->index && equal(a->lhs, b->lhs);
    default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
}

void collect(const NodePtr& n, std::set<int>& out) {
  if (!n) return;
  if (n->op == Op::Var) out.insert(n->index);
  collect(n->lhs, out);
  collect(n->rhs, out);
}

[[noreturn]] void domain_error(const NodePtr& n, const char* why) {
  throw Error(ErrorCode::DomainError, std::string("eval: ") + why + " in " + print(n));
}

double eval_node(const Node& n, const Point& p) {
  switch (n.op) {
    case Op::Lit: return n.value;
    case Op::Var: return p(n.index);
    case Op::Add: return eval_node(*n.lhs, p) + eval_node(*n.rhs, p);
    case Op::Sub: return eval_node(*n.lhs, p) - eval_node(*n.rhs, p);
    case Op::Mul: return eval_node(*n.lhs, p) * eval_node(*n.rhs, p);
    case Op::Div: return eval_node(*n.lhs, p) / eval_node(*n.rhs, p);
    case Op::Neg: return -eval_node(*n.lhs, p);
    case Op::Pow: return std::pow(eval_node(*n.lhs, p), n.index);
    case Op::Exp: return std::exp(eval_node(*n.lhs, p));
    case Op::Log: return std::log(eval_node(*n.lhs, p));
    case Op::Sin: return std::sin(eval_node(*n.lhs, p));
    case Op::Cos: return std::cos(eval_node(*n.lhs, p));
    case Op::Sqrt: return std::sqrt(eval_node(*n.lhs, p));
  }
  return 0.0;
}

DualScalar dual_node(const NodePtr& np, const Point& p, int dim) {
  const Node& n = *np;
  const auto nd = static_cast<std::size_t>(dim);
  DualScalar out;
  out.dim = dim;
  switch (n.op) {
    case Op::Lit:
      out.value = n.value;
      return out;
    case Op::Var:
      out.value = p(n.index);
      out.grad[static_cast<std::size_t>(n.index)] = 1.0;
      return out;
    default:
      break;
  }
  const DualScalar a = dual_node(n.lhs, p, dim);
  switch (n.op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const DualScalar b = dual_node(n.rhs, p, dim);
      if (n.op == Op::Add) {
        out.value = a.value + b.value;
        simd::axpby(nd, 1.0, a.grad.data(), 1.0, b.grad.data(), out.grad.data());
      } else if (n.op == Op::Sub) {
        out.value = a.value - b.value;
        simd::axpby(nd, 1.0, a.grad.data(), -1.0, b.grad.data(), out.grad.data());
      } else if (n.op == Op::Mul) {
        out.value = a.value * b.value;
        simd::axpby(nd, b.value, a.grad.data(), a.value, b.grad.data(), out.grad.data());
      } else {
        if (b.value == 0.0) domain_error(np, "division by zero");
        out.value = a.value / b.value;
        simd::axpby(nd, 1.0 / b.value, a.grad.data(), -out.value / b.value, b.grad.data(),
                    out.grad.data());
      }
      break;
    }
    case Op::Neg:
      out.value = -a.value;
      simd::scale(nd, -1.0, a.grad.data(), out.grad.data());
      break;
    case Op::Pow: {
      const int k = n.index;
      if (k < 0 && a.value == 0.0) domain_error(np, "negative power of zero");
      out.value = std::pow(a.value, k);
      const double slope = k == 0 ? 0.0 : k * std::pow(a.value, k - 1);
      simd::scale(nd, slope, a.grad.data(), out.grad.data());
      break;
    }
    case Op::Exp:
      out.value = std::exp(a.value);
      simd::scale(nd, out.value, a.grad.data(), out.grad.data());
      break;
    case Op::Log:
      if (!(a.value > 0.0)) domain_error(np, "log of non-positive value");
      out.value = std::log(a.value);
      simd::scale(nd, 1.0 / a.value, a.grad.data(), out.grad.data());
      break;
    case Op::Sin:
      out.value = std::sin(a.value);
      simd::scale(nd, std::cos(a.value), a.grad.data(), out.grad.data());
      break;
    case Op::Cos:
      out.value = std::cos(a.value);
      simd::scale(nd, -std::sin(a.value), a.grad.data(), out.grad.data());
      break;
    case Op::Sqrt:
      if (!(a.value > 0.0)) domain_error(np, "sqrt of non-positive value");
      out.value = std::sqrt(a.value);
      simd::scale(nd, 0.5 / out.value, a.grad.data(), out.grad.data());
      break;
    default:
      break;
  }
  if (!std::isfinite(out.value)) domain_error(np, "non-finite value");
  return out;
}

}  // namespace

std::string print(const NodePtr& n) {
  switch (n->op) {
    case Op::Lit: return format_double(n->value);
    case Op::Var: return "x" + std::to_string(n->index);
    case Op::Add: return "(" + print(n->lhs) + " + " + print(n->rhs) + ")";
    case Op::Sub: return "(" + print(n->lhs) + " - " + print(n->rhs) + ")";
    case Op::Mul: return "(" + print(n->lhs) + " * " + print(n->rhs) + ")";
    case Op::Div: return "(" + print(n->lhs) + " / " + print(n->rhs) + ")";
    case Op::Neg: return "(-" + print(n->lhs) + ")";
    case Op::Pow: return "(" + print(n->lhs) + "^" + std::to_string(n->index) + ")";
    default: return std::string(func_name(n->op)) + "(" + print(n->lhs) + ")";
  }
}

std::string Expr::print() const { return expr::print(root_); }

std::set<int> Expr::symbols() const {
  std::set<int> out;
  collect(root_, out);
  return out;
}

bool Expr::is_constant() const {
  const Node* n = root_.get();
  while (n != nullptr && n->op == Op::Neg) n = n->lhs.get();
  return n != nullptr && n->op == Op::Lit;
}

bool operator==(const Expr& a, const Expr& b) { return a.dim_ == b.dim_ && equal(a.root_, b.root_); }

Expr parse(std::string_view text, int dim) {
  require_dim(dim, "parse");
  return Expr(Parser(text, dim).parse_all(), dim);
}

double eval(const Expr& e, const Point& p) {
  if (p.size() != e.dim()) throw Error(ErrorCode::InvalidInput, "eval: point dimension mismatch");
  return eval_node(*e.root(), p);
}

DualScalar eval_dual(const Expr& e, const Point& p) {
  if (p.size() != e.dim()) throw Error(ErrorCode::InvalidInput, "eval_dual: point dimension mismatch");
  return dual_node(e.root(), p, e.dim());
}

}  // namespace geq::expr
