#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sprayconn/core_space.hpp"
#include "sprayconn/errors.hpp"
#include "sprayconn/jet.hpp"

namespace sprayconn {

namespace detail {

enum class Op { constant, input, add, sub, mul, div, neg, ipow, rpow, exp, sin, cos, log, sqrt };

struct Node {
  Op op = Op::constant;
  double value = 0.0;       // constant value or real exponent
  std::size_t index = 0;    // input index
  long exponent = 0;        // integer exponent
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
  std::string label;        // source text, used in evaluation errors
};

using NodePtr = std::shared_ptr<const Node>;

}  // namespace detail

/// Scalar expression over indexed inputs. Immutable; sub-trees are shared.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}
  static Expr constant(double c);
  static Expr input(std::size_t index, std::string name = {});

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, long exponent);
  friend Expr exp(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);

  const detail::NodePtr& node() const noexcept { return node_; }
  explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}

  /// Largest input index referenced plus one (0 for constants).
  std::size_t input_bound() const;
  std::string text() const { return node_->label; }

  /// Evaluates the tree over any scalar supporting the jet operations.
  template <typename S>
  S eval(std::span<const S> in) const {
    return eval_node<S>(*node_, in);
  }

 private:
  template <typename S>
  static S eval_node(const detail::Node& n, std::span<const S> in);

  detail::NodePtr node_;
};

/// Vector-valued map R^arity_in -> R^arity_out given by one expression per
/// output. The same tree evaluates over doubles and over Jet2.
class ExprMap {
 public:
  ExprMap() = default;
  ExprMap(std::vector<std::string> input_names, std::vector<Expr> outputs);

  /// Parses "expr" or "[expr, expr, ...]". Identifiers must be among
  /// `input_names`; functions are exp, sin, cos, log, sqrt; constant `pi`.
  /// `line` is forwarded into ParseError for file diagnostics.
  static ExprMap parse(std::string_view text, std::vector<std::string> input_names,
                       int line = 0);

  /// Identity map on inputs named prefix0..prefix{n-1}.
  static ExprMap identity(std::size_t n, const std::string& prefix = "x");
  /// Constant map with the given input arity.
  static ExprMap constant(std::size_t arity_in, const Vector& value,
                          const std::string& prefix = "x");
  /// x -> A x.
  static ExprMap linear(const std::vector<std::vector<double>>& a,
                        const std::string& prefix = "x");

  std::size_t arity_in() const noexcept { return inputs_.size(); }
  std::size_t arity_out() const noexcept { return outputs_.size(); }
  const std::vector<std::string>& input_names() const noexcept { return inputs_; }
  const std::vector<Expr>& outputs() const noexcept { return outputs_; }
  const Expr& output(std::size_t i) const { return outputs_.at(i); }
  std::string text() const;

  Vector operator()(const Vector& x) const;

  template <typename S>
  std::vector<S> eval(std::span<const S> in) const {
    if (in.size() != inputs_.size())
      throw DimensionError("expression expects " + std::to_string(inputs_.size()) +
                           " inputs, got " + std::to_string(in.size()));
    std::vector<S> out;
    out.reserve(outputs_.size());
    for (const auto& e : outputs_) out.push_back(e.eval<S>(in));
    return out;
  }

  /// this ∘ inner: inner's outputs feed this map's inputs.
  ExprMap compose(const ExprMap& inner) const;
  /// Outputs [a_0..a_n, b_0..b_m] over the shared inputs.
  static ExprMap stack(const ExprMap& a, const ExprMap& b);
  /// Component-wise scalar product f * F (f has one output).
  static ExprMap scale(const ExprMap& f, const ExprMap& field);

 private:
  std::vector<std::string> inputs_;
  std::vector<Expr> outputs_;
};

/// Input names prefix0, ..., prefix{n-1}.
std::vector<std::string> indexed_names(const std::string& prefix, std::size_t n);
/// Concatenation of indexed name blocks, e.g. ({"x","v"}, 2) -> x0 x1 v0 v1.
std::vector<std::string> indexed_names(std::initializer_list<std::string> prefixes,
                                       std::size_t n);

template <typename S>
S Expr::eval_node(const detail::Node& n, std::span<const S> in) {
  using detail::Op;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  switch (n.op) {
    case Op::constant:
      return S(n.value);
    case Op::input:
      if (n.index >= in.size())
        throw EvaluationError("input index out of range", n.label);
      return in[n.index];
    case Op::add:
      return eval_node<S>(*n.a, in) + eval_node<S>(*n.b, in);
    case Op::sub:
      return eval_node<S>(*n.a, in) - eval_node<S>(*n.b, in);
    case Op::mul:
      return eval_node<S>(*n.a, in) * eval_node<S>(*n.b, in);
    case Op::div: {
      S num = eval_node<S>(*n.a, in);
      S den = eval_node<S>(*n.b, in);
      if (base_value(den) == 0.0) throw EvaluationError("division by zero", n.label);
      return num / den;
    }
    case Op::neg:
      return -eval_node<S>(*n.a, in);
    case Op::ipow: {
      S base = eval_node<S>(*n.a, in);
      if (n.exponent < 0 && base_value(base) == 0.0)
        throw EvaluationError("negative power of zero", n.label);
      return ipow(base, n.exponent);
    }
    case Op::rpow: {
      S base = eval_node<S>(*n.a, in);
      if (!(base_value(base) > 0.0))
        throw EvaluationError("non-integer power of non-positive base", n.label);
      return exp(S(n.value) * log(base));
    }
    case Op::exp:
      return exp(eval_node<S>(*n.a, in));
    case Op::sin:
      return sin(eval_node<S>(*n.a, in));
    case Op::cos:
      return cos(eval_node<S>(*n.a, in));
    case Op::log: {
      S arg = eval_node<S>(*n.a, in);
      if (!(base_value(arg) > 0.0))
        throw EvaluationError("log of non-positive value", n.label);
      return log(arg);
    }
    case Op::sqrt: {
      S arg = eval_node<S>(*n.a, in);
      if (!(base_value(arg) > 0.0))
        throw EvaluationError("sqrt at non-positive value", n.label);
      return sqrt(arg);
    }
  }
  throw EvaluationError("unknown node", n.label);
}

}  // namespace sprayconn
