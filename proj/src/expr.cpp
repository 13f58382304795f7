#include "sprayconn/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace sprayconn {

using detail::Node;
using detail::NodePtr;
using detail::Op;

namespace {

constexpr std::size_t kMaxLabel = 96;

std::string clip(std::string s) {
  if (s.size() > kMaxLabel) s = s.substr(0, kMaxLabel - 3) + "...";
  return s;
}

std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

NodePtr make(Op op, NodePtr a, NodePtr b, std::string label) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->label = clip(std::move(label));
  return n;
}

NodePtr binary(Op op, const NodePtr& a, const NodePtr& b, const char* sym) {
  return make(op, a, b, "(" + a->label + sym + b->label + ")");
}

NodePtr unary_fn(Op op, const NodePtr& a, const char* name) {
  return make(op, a, nullptr, std::string(name) + "(" + a->label + ")");
}

NodePtr power(const NodePtr& base, double p, std::string label) {
  auto n = std::make_shared<Node>();
  n->a = base;
  n->label = clip(std::move(label));
  if (std::abs(p) < 1e9 && p == std::round(p)) {
    n->op = Op::ipow;
    n->exponent = static_cast<long>(p);
  } else {
    n->op = Op::rpow;
    n->value = p;
  }
  return n;
}

bool references_input(const Node& n) {
  if (n.op == Op::input) return true;
  return (n.a && references_input(*n.a)) || (n.b && references_input(*n.b));
}

std::size_t bound(const Node& n) {
  if (n.op == Op::input) return n.index + 1;
  std::size_t m = 0;
  if (n.a) m = std::max(m, bound(*n.a));
  if (n.b) m = std::max(m, bound(*n.b));
  return m;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names, int line)
      : s_(text), line_(line) {
    for (std::size_t i = 0; i < names.size(); ++i) index_[names[i]] = i;
  }

  std::vector<Expr> parse_list() {
    std::vector<Expr> out;
    skip();
    if (peek() == '[') {
      ++pos_;
      skip();
      if (peek() == ']') fail("empty expression list");
      out.emplace_back(expr());
      skip();
      while (peek() == ',') {
        ++pos_;
        out.emplace_back(expr());
        skip();
      }
      expect(']');
    } else {
      out.emplace_back(expr());
    }
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, line_, static_cast<int>(pos_) + 1);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string text_from(std::size_t start) const {
    std::string t(s_.substr(start, pos_ - start));
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    return t;
  }

  NodePtr expr() {
    skip();
    std::size_t start = pos_;
    NodePtr lhs = term();
    for (;;) {
      skip();
      char c = peek();
      if (c != '+' && c != '-') break;
      ++pos_;
      NodePtr rhs = term();
      lhs = make(c == '+' ? Op::add : Op::sub, lhs, rhs, text_from(start));
    }
    return lhs;
  }

  NodePtr term() {
    skip();
    std::size_t start = pos_;
    NodePtr lhs = unary();
    for (;;) {
      skip();
      char c = peek();
      if (c != '*' && c != '/') break;
      ++pos_;
      NodePtr rhs = unary();
      lhs = make(c == '*' ? Op::mul : Op::div, lhs, rhs, text_from(start));
    }
    return lhs;
  }

  NodePtr unary() {
    skip();
    std::size_t start = pos_;
    if (peek() == '-') {
      ++pos_;
      NodePtr a = unary();
      return make(Op::neg, a, nullptr, text_from(start));
    }
    if (peek() == '+') {
      ++pos_;
      return unary();
    }
    return pow_expr();
  }

  NodePtr pow_expr() {
    skip();
    std::size_t start = pos_;
    NodePtr base = primary();
    skip();
    if (peek() != '^') return base;
    ++pos_;
    std::size_t exp_pos = pos_;
    NodePtr e = unary();
    if (references_input(*e)) {
      pos_ = exp_pos;
      fail("exponent must be a constant");
    }
    double p = Expr(e).eval<double>(std::span<const double>{});
    return power(base, p, text_from(start));
  }

  NodePtr primary() {
    skip();
    std::size_t start = pos_;
    char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
      std::string id(s_.substr(start, pos_ - start));
      skip();
      if (peek() == '(') {
        static const std::unordered_map<std::string, Op> fns = {
            {"exp", Op::exp}, {"sin", Op::sin}, {"cos", Op::cos},
            {"log", Op::log}, {"sqrt", Op::sqrt}};
        auto it = fns.find(id);
        if (it == fns.end()) {
          pos_ = start;
          fail("unknown function '" + id + "'");
        }
        ++pos_;
        NodePtr arg = expr();
        expect(')');
        return make(it->second, arg, nullptr, text_from(start));
      }
      if (id == "pi") return Expr::constant(std::numbers::pi).node();
      auto it = index_.find(id);
      if (it == index_.end()) {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      return Expr::input(it->second, id).node();
    }
    if (c == '\0') fail("unexpected end of expression");
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') ++pos_;
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        pos_ = save;
      } else {
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      }
    }
    std::string tok(s_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
    if (used != tok.size()) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
    auto n = std::make_shared<Node>();
    n->op = Op::constant;
    n->value = v;
    n->label = tok;
    return n;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
  std::unordered_map<std::string, std::size_t> index_;
};

NodePtr substitute(const NodePtr& n, const std::vector<Expr>& repl,
                   std::unordered_map<const Node*, NodePtr>& memo) {
  if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
  NodePtr out;
  if (n->op == Op::input) {
    if (n->index >= repl.size())
      throw DimensionError("composition: input index out of range");
    out = repl[n->index].node();
  } else if (n->op == Op::constant) {
    out = n;
  } else {
    auto copy = std::make_shared<Node>(*n);
    if (n->a) copy->a = substitute(n->a, repl, memo);
    if (n->b) copy->b = substitute(n->b, repl, memo);
    out = copy;
  }
  memo.emplace(n.get(), out);
  return out;
}

}  // namespace

Expr Expr::constant(double c) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = c;
  n->label = fmt_number(c);
  return Expr(n);
}

Expr Expr::input(std::size_t index, std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::input;
  n->index = index;
  n->label = name.empty() ? "in" + std::to_string(index) : std::move(name);
  return Expr(n);
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(binary(Op::add, a.node_, b.node_, "+")); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(binary(Op::sub, a.node_, b.node_, "-")); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(binary(Op::mul, a.node_, b.node_, "*")); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(binary(Op::div, a.node_, b.node_, "/")); }
Expr operator-(const Expr& a) { return Expr(make(Op::neg, a.node_, nullptr, "-" + a.node_->label)); }
Expr pow(const Expr& base, long exponent) {
  return Expr(power(base.node_, static_cast<double>(exponent),
                    base.node_->label + "^" + std::to_string(exponent)));
}
Expr exp(const Expr& a) { return Expr(unary_fn(Op::exp, a.node_, "exp")); }
Expr sin(const Expr& a) { return Expr(unary_fn(Op::sin, a.node_, "sin")); }
Expr cos(const Expr& a) { return Expr(unary_fn(Op::cos, a.node_, "cos")); }

std::size_t Expr::input_bound() const { return bound(*node_); }

ExprMap::ExprMap(std::vector<std::string> input_names, std::vector<Expr> outputs)
    : inputs_(std::move(input_names)), outputs_(std::move(outputs)) {
  for (const auto& e : outputs_)
    if (e.input_bound() > inputs_.size())
      throw DimensionError("expression references input beyond arity " +
                           std::to_string(inputs_.size()));
}

ExprMap ExprMap::parse(std::string_view text, std::vector<std::string> input_names,
                       int line) {
  Parser p(text, input_names, line);
  auto outs = p.parse_list();
  return ExprMap(std::move(input_names), std::move(outs));
}

ExprMap ExprMap::identity(std::size_t n, const std::string& prefix) {
  auto names = indexed_names(prefix, n);
  std::vector<Expr> outs;
  for (std::size_t i = 0; i < n; ++i) outs.push_back(Expr::input(i, names[i]));
  return ExprMap(std::move(names), std::move(outs));
}

ExprMap ExprMap::constant(std::size_t arity_in, const Vector& value,
                          const std::string& prefix) {
  std::vector<Expr> outs;
  for (double c : value) outs.push_back(Expr::constant(c));
  return ExprMap(indexed_names(prefix, arity_in), std::move(outs));
}

ExprMap ExprMap::linear(const std::vector<std::vector<double>>& a,
                        const std::string& prefix) {
  if (a.empty()) throw DimensionError("empty matrix");
  const std::size_t n = a.front().size();
  auto names = indexed_names(prefix, n);
  std::vector<Expr> outs;
  for (const auto& row : a) {
    if (row.size() != n) throw DimensionError("ragged matrix");
    Expr acc = Expr::constant(0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (row[j] != 0.0) acc = acc + Expr::constant(row[j]) * Expr::input(j, names[j]);
    outs.push_back(acc);
  }
  return ExprMap(std::move(names), std::move(outs));
}

std::string ExprMap::text() const {
  std::string s = "[";
  for (std::size_t i = 0; i < outputs_.size(); ++i)
    s += (i ? ", " : "") + outputs_[i].text();
  return s + "]";
}

Vector ExprMap::operator()(const Vector& x) const {
  return Vector(eval<double>(x.span()));
}

ExprMap ExprMap::compose(const ExprMap& inner) const {
  if (inner.arity_out() != arity_in())
    throw DimensionError("composition arity mismatch: inner yields " +
                         std::to_string(inner.arity_out()) + ", outer takes " +
                         std::to_string(arity_in()));
  std::unordered_map<const Node*, NodePtr> memo;
  std::vector<Expr> outs;
  for (const auto& e : outputs_)
    outs.emplace_back(substitute(e.node(), inner.outputs_, memo));
  return ExprMap(inner.inputs_, std::move(outs));
}

ExprMap ExprMap::stack(const ExprMap& a, const ExprMap& b) {
  if (a.arity_in() != b.arity_in()) throw DimensionError("stack arity mismatch");
  auto outs = a.outputs_;
  outs.insert(outs.end(), b.outputs_.begin(), b.outputs_.end());
  return ExprMap(a.inputs_, std::move(outs));
}

ExprMap ExprMap::scale(const ExprMap& f, const ExprMap& field) {
  if (f.arity_out() != 1) throw DimensionError("scale expects a scalar function");
  if (f.arity_in() != field.arity_in()) throw DimensionError("scale arity mismatch");
  std::vector<Expr> outs;
  for (const auto& e : field.outputs_) outs.push_back(f.output(0) * e);
  return ExprMap(field.inputs_, std::move(outs));
}

std::vector<std::string> indexed_names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

std::vector<std::string> indexed_names(std::initializer_list<std::string> prefixes,
                                       std::size_t n) {
  std::vector<std::string> names;
  for (const auto& p : prefixes) {
    auto block = indexed_names(p, n);
    names.insert(names.end(), block.begin(), block.end());
  }
  return names;
}

}  // namespace sprayconn
