#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quasar/decimal.hpp"
#include "quasar/text.hpp"

namespace quasar {

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Small arithmetic/boolean expression language over exact decimals, used for
// template answer formulas and sampling constraints. Operators: + - * / % ^,
// comparisons, && || !, and the functions if(c,a,b), floor, abs, min, max,
// is_int. Booleans are 0/1; any nonzero value is true.
class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser parser{text, 0};
    Expression out;
    out.root_ = parser.parse_or();
    parser.skip_spaces();
    if (parser.pos != text.size()) {
      throw ExprError("unexpected trailing input in expression: " + std::string(text));
    }
    out.text_ = std::string(text);
    return out;
  }

  const std::string& text() const { return text_; }

  Decimal evaluate(const std::map<std::string, Decimal>& bindings) const {
    return eval(root_, bindings);
  }

  std::set<std::string> identifiers() const {
    std::set<std::string> out;
    collect(root_, out);
    return out;
  }

 private:
  enum class Op {
    kNumber, kIdent,
    kAdd, kSub, kMul, kDiv, kMod, kPow, kNeg,
    kLt, kLe, kGt, kGe, kEq, kNe, kAnd, kOr, kNot,
    kIf, kFloor, kAbs, kMin, kMax, kIsInt,
  };

  struct Node {
    Op op = Op::kNumber;
    Decimal number;
    std::string name;
    std::vector<Node> children;
  };

  struct Parser {
    std::string_view text;
    size_t pos;

    void skip_spaces() {
      while (pos < text.size() && is_space(text[pos])) ++pos;
    }

    bool eat(std::string_view token) {
      skip_spaces();
      if (text.substr(pos, token.size()) == token) {
        pos += token.size();
        return true;
      }
      return false;
    }

    [[noreturn]] void fail(const std::string& message) {
      throw ExprError(message + " at position " + std::to_string(pos) + " in: " +
                      std::string(text));
    }

    Node parse_or() {
      Node lhs = parse_and();
      while (eat("||")) {
        Node node;
        node.op = Op::kOr;
        node.children = {std::move(lhs), parse_and()};
        lhs = std::move(node);
      }
      return lhs;
    }

    Node parse_and() {
      Node lhs = parse_cmp();
      while (eat("&&")) {
        Node node;
        node.op = Op::kAnd;
        node.children = {std::move(lhs), parse_cmp()};
        lhs = std::move(node);
      }
      return lhs;
    }

    Node parse_cmp() {
      Node lhs = parse_add();
      Op op;
      if (eat("<=")) op = Op::kLe;
      else if (eat(">=")) op = Op::kGe;
      else if (eat("==")) op = Op::kEq;
      else if (eat("!=")) op = Op::kNe;
      else if (eat("<")) op = Op::kLt;
      else if (eat(">")) op = Op::kGt;
      else return lhs;
      Node node;
      node.op = op;
      node.children = {std::move(lhs), parse_add()};
      return node;
    }

    Node parse_add() {
      Node lhs = parse_mul();
      while (true) {
        if (eat("+")) {
          Node node;
          node.op = Op::kAdd;
          node.children = {std::move(lhs), parse_mul()};
          lhs = std::move(node);
        } else if (eat("-")) {
          Node node;
          node.op = Op::kSub;
          node.children = {std::move(lhs), parse_mul()};
          lhs = std::move(node);
        } else {
          return lhs;
        }
      }
    }

    Node parse_mul() {
      Node lhs = parse_unary();
      while (true) {
        if (eat("*")) {
          Node node;
          node.op = Op::kMul;
          node.children = {std::move(lhs), parse_unary()};
          lhs = std::move(node);
        } else if (eat("/")) {
          Node node;
          node.op = Op::kDiv;
          node.children = {std::move(lhs), parse_unary()};
          lhs = std::move(node);
        } else if (eat("%")) {
          Node node;
          node.op = Op::kMod;
          node.children = {std::move(lhs), parse_unary()};
          lhs = std::move(node);
        } else {
          return lhs;
        }
      }
    }

    Node parse_unary() {
      if (eat("!")) {
        Node node;
        node.op = Op::kNot;
        node.children = {parse_unary()};
        return node;
      }
      if (eat("-")) {
        Node node;
        node.op = Op::kNeg;
        node.children = {parse_unary()};
        return node;
      }
      return parse_power();
    }

    Node parse_power() {
      Node base = parse_primary();
      if (eat("^")) {
        Node node;
        node.op = Op::kPow;
        node.children = {std::move(base), parse_unary()};  // right associative
        return node;
      }
      return base;
    }

    Node parse_primary() {
      skip_spaces();
      if (pos >= text.size()) fail("unexpected end of expression");
      char c = text[pos];
      if (c == '(') {
        ++pos;
        Node inner = parse_or();
        if (!eat(")")) fail("expected ')'");
        return inner;
      }
      if ((c >= '0' && c <= '9') || c == '.') {
        size_t start = pos;
        while (pos < text.size() &&
               ((text[pos] >= '0' && text[pos] <= '9') || text[pos] == '.')) {
          ++pos;
        }
        Node node;
        node.op = Op::kNumber;
        try {
          node.number = Decimal::parse(text.substr(start, pos - start));
        } catch (const std::exception& e) {
          fail(e.what());
        }
        return node;
      }
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
        size_t start = pos;
        while (pos < text.size() &&
               (detail_is_ident(text[pos]))) {
          ++pos;
        }
        std::string name(text.substr(start, pos - start));
        skip_spaces();
        if (pos < text.size() && text[pos] == '(') {
          ++pos;
          std::vector<Node> args;
          skip_spaces();
          if (!eat(")")) {
            args.push_back(parse_or());
            while (eat(",")) args.push_back(parse_or());
            if (!eat(")")) fail("expected ')' after arguments");
          }
          return make_call(name, std::move(args));
        }
        Node node;
        node.op = Op::kIdent;
        node.name = std::move(name);
        return node;
      }
      fail("unexpected character");
    }

    static bool detail_is_ident(char c) {
      return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
             c == '_';
    }

    Node make_call(const std::string& name, std::vector<Node> args) {
      Node node;
      auto want = [&](size_t n, Op op) {
        if (args.size() != n) {
          fail(name + " expects " + std::to_string(n) + " argument(s)");
        }
        node.op = op;
        node.children = std::move(args);
      };
      if (name == "if") want(3, Op::kIf);
      else if (name == "floor") want(1, Op::kFloor);
      else if (name == "abs") want(1, Op::kAbs);
      else if (name == "min") want(2, Op::kMin);
      else if (name == "max") want(2, Op::kMax);
      else if (name == "is_int") want(1, Op::kIsInt);
      else fail("unknown function: " + name);
      return node;
    }
  };

  static Decimal eval(const Node& node, const std::map<std::string, Decimal>& bindings) {
    auto boolean = [](bool b) { return Decimal(b ? 1 : 0); };
    switch (node.op) {
      case Op::kNumber: return node.number;
      case Op::kIdent: {
        auto it = bindings.find(node.name);
        if (it == bindings.end()) throw ExprError("unbound identifier: " + node.name);
        return it->second;
      }
      case Op::kAdd: return eval(node.children[0], bindings) + eval(node.children[1], bindings);
      case Op::kSub: return eval(node.children[0], bindings) - eval(node.children[1], bindings);
      case Op::kMul: return eval(node.children[0], bindings) * eval(node.children[1], bindings);
      case Op::kDiv: return eval(node.children[0], bindings) / eval(node.children[1], bindings);
      case Op::kMod: return eval(node.children[0], bindings) % eval(node.children[1], bindings);
      case Op::kPow: {
        Decimal base = eval(node.children[0], bindings);
        Decimal exponent = eval(node.children[1], bindings);
        if (!exponent.is_integer()) throw ExprError("exponent must be an integer");
        return base.pow_int(exponent.numerator());
      }
      case Op::kNeg: return -eval(node.children[0], bindings);
      case Op::kLt: return boolean(eval(node.children[0], bindings) < eval(node.children[1], bindings));
      case Op::kLe: return boolean(eval(node.children[0], bindings) <= eval(node.children[1], bindings));
      case Op::kGt: return boolean(eval(node.children[0], bindings) > eval(node.children[1], bindings));
      case Op::kGe: return boolean(eval(node.children[0], bindings) >= eval(node.children[1], bindings));
      case Op::kEq: return boolean(eval(node.children[0], bindings) == eval(node.children[1], bindings));
      case Op::kNe: return boolean(eval(node.children[0], bindings) != eval(node.children[1], bindings));
      case Op::kAnd:
        return boolean(!eval(node.children[0], bindings).is_zero() &&
                       !eval(node.children[1], bindings).is_zero());
      case Op::kOr:
        return boolean(!eval(node.children[0], bindings).is_zero() ||
                       !eval(node.children[1], bindings).is_zero());
      case Op::kNot: return boolean(eval(node.children[0], bindings).is_zero());
      case Op::kIf:
        return eval(node.children[0], bindings).is_zero() ? eval(node.children[2], bindings)
                                                          : eval(node.children[1], bindings);
      case Op::kFloor: return eval(node.children[0], bindings).floor();
      case Op::kAbs: return eval(node.children[0], bindings).abs();
      case Op::kMin: {
        Decimal a = eval(node.children[0], bindings);
        Decimal b = eval(node.children[1], bindings);
        return a < b ? a : b;
      }
      case Op::kMax: {
        Decimal a = eval(node.children[0], bindings);
        Decimal b = eval(node.children[1], bindings);
        return a < b ? b : a;
      }
      case Op::kIsInt: return boolean(eval(node.children[0], bindings).is_integer());
    }
    throw ExprError("unreachable");
  }

  static void collect(const Node& node, std::set<std::string>& out) {
    if (node.op == Op::kIdent) out.insert(node.name);
    for (const auto& child : node.children) collect(child, out);
  }

  Node root_;
  std::string text_;
};

}  // namespace quasar
