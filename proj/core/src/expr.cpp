#include "pcflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace pcflow {

struct Expr::Node {
  enum Kind { kNum, kVarX, kVarY, kAdd, kSub, kMul, kDiv, kPow, kNeg,
              kSin, kCos, kExp } kind;
  double value = 0.0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expr::Node;
using P = std::shared_ptr<const Node>;

P leaf(Node::Kind k, double v = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->value = v;
  return n;
}

P unary(Node::Kind k, P a) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  return n;
}

P binary(Node::Kind k, P a, P b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Parser {
  const std::string& s;
  size_t pos = 0;

  explicit Parser(const std::string& src) : s(src) {}

  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("expr: " + what + " at position " +
                                std::to_string(pos) + " in \"" + s + "\"");
  }

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip();
    return pos < s.size() ? s[pos] : '\0';
  }

  P sum() {
    P lhs = term();
    for (;;) {
      if (eat('+')) lhs = binary(Node::kAdd, lhs, term());
      else if (eat('-')) lhs = binary(Node::kSub, lhs, term());
      else return lhs;
    }
  }

  P term() {
    P lhs = factor();
    for (;;) {
      if (eat('*')) lhs = binary(Node::kMul, lhs, factor());
      else if (eat('/')) lhs = binary(Node::kDiv, lhs, factor());
      else return lhs;
    }
  }

  // unary minus binds looser than ^, so -x^2 is -(x^2)
  P factor() {
    if (eat('-')) return unary(Node::kNeg, factor());
    if (eat('+')) return factor();
    return power();
  }

  P power() {
    P base = atom();
    if (eat('^')) return binary(Node::kPow, base, factor());
    return base;
  }

  P atom() {
    const char c = peek();
    if (c == '(') {
      ++pos;
      P inner = sum();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail("unexpected character");
  }

  P number() {
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("bad number");
    pos += static_cast<size_t>(end - begin);
    return leaf(Node::kNum, v);
  }

  P name() {
    const size_t start = pos;
    while (pos < s.size() &&
           std::isalpha(static_cast<unsigned char>(s[pos])))
      ++pos;
    const std::string id = s.substr(start, pos - start);
    if (id == "x") return leaf(Node::kVarX);
    if (id == "y") return leaf(Node::kVarY);
    if (id == "pi") return leaf(Node::kNum, 3.14159265358979323846);
    Node::Kind k;
    if (id == "sin") k = Node::kSin;
    else if (id == "cos") k = Node::kCos;
    else if (id == "exp") k = Node::kExp;
    else { pos = start; fail("unknown name '" + id + "'"); }
    if (!eat('(')) fail("expected '(' after " + id);
    P arg = sum();
    if (!eat(')')) fail("missing ')'");
    return unary(k, arg);
  }
};

double eval_node(const Node& n, double x, double y) {
  switch (n.kind) {
    case Node::kNum: return n.value;
    case Node::kVarX: return x;
    case Node::kVarY: return y;
    case Node::kAdd: return eval_node(*n.a, x, y) + eval_node(*n.b, x, y);
    case Node::kSub: return eval_node(*n.a, x, y) - eval_node(*n.b, x, y);
    case Node::kMul: return eval_node(*n.a, x, y) * eval_node(*n.b, x, y);
    case Node::kDiv: return eval_node(*n.a, x, y) / eval_node(*n.b, x, y);
    case Node::kPow:
      return std::pow(eval_node(*n.a, x, y), eval_node(*n.b, x, y));
    case Node::kNeg: return -eval_node(*n.a, x, y);
    case Node::kSin: return std::sin(eval_node(*n.a, x, y));
    case Node::kCos: return std::cos(eval_node(*n.a, x, y));
    case Node::kExp: return std::exp(eval_node(*n.a, x, y));
  }
  return 0.0;
}

}  // namespace

Expr parse_expr(const std::string& src) {
  Parser p(src);
  Expr e;
  e.root = p.sum();
  p.skip();
  if (p.pos != src.size()) p.fail("trailing input");
  return e;
}

double eval(const Expr& e, double x, double y) {
  if (!e.root) throw std::invalid_argument("expr: empty expression");
  return eval_node(*e.root, x, y);
}

std::vector<double> eval_line(const Expr& e, char var,
                              const std::vector<double>& pts) {
  if (var != 'x' && var != 'y')
    throw std::invalid_argument("expr: line variable must be x or y");
  std::vector<double> out(pts.size());
  for (size_t k = 0; k < pts.size(); ++k)
    out[k] = (var == 'x') ? eval(e, pts[k], 0.0) : eval(e, 0.0, pts[k]);
  return out;
}

}  // namespace pcflow
