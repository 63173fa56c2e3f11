#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "roughflow/core/errors.hpp"

namespace roughflow {

// A deliberately small arithmetic grammar for field and driver expressions:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := primary ('^' factor)?
//   primary:= number | name | name '(' expr ')' | '(' expr ')'
//
// Names resolve against the caller's variable list, the constant pi, or one
// of sin, cos, tan, exp, log, sqrt, abs.  Expressions compile once at setup
// and evaluate against a flat argument buffer, so configs stay declarative
// without pulling in a scripting runtime.
namespace expr_detail {

enum class Fn { sin, cos, tan, exp, log, sqrt, abs };

struct Node {
    enum class Kind { number, variable, negate, binary, call } kind;
    double value = 0.0;
    std::size_t slot = 0;
    char op = 0;
    Fn fn = Fn::sin;
    std::unique_ptr<Node> lhs, rhs;

    double eval(const double* args) const {
        switch (kind) {
        case Kind::number: return value;
        case Kind::variable: return args[slot];
        case Kind::negate: return -lhs->eval(args);
        case Kind::binary: {
            double a = lhs->eval(args), b = rhs->eval(args);
            switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            default: return std::pow(a, b);
            }
        }
        case Kind::call: {
            double a = lhs->eval(args);
            switch (fn) {
            case Fn::sin: return std::sin(a);
            case Fn::cos: return std::cos(a);
            case Fn::tan: return std::tan(a);
            case Fn::exp: return std::exp(a);
            case Fn::log: return std::log(a);
            case Fn::sqrt: return std::sqrt(a);
            default: return std::abs(a);
            }
        }
        }
        return 0.0;
    }
};

class Parser {
  public:
    Parser(const std::string& text, const std::vector<std::string>& vars)
        : text_(text), vars_(vars) {}

    std::unique_ptr<Node> run() {
        auto root = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return root;
    }

  private:
    const std::string& text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression \"" + text_ + "\": " + what + " at position " +
                          std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    std::unique_ptr<Node> expr() {
        auto node = term();
        while (true) {
            char c = peek();
            if (c != '+' && c != '-') return node;
            ++pos_;
            auto next = std::make_unique<Node>();
            next->kind = Node::Kind::binary;
            next->op = c;
            next->lhs = std::move(node);
            next->rhs = term();
            node = std::move(next);
        }
    }

    std::unique_ptr<Node> term() {
        auto node = factor();
        while (true) {
            char c = peek();
            if (c != '*' && c != '/') return node;
            ++pos_;
            auto next = std::make_unique<Node>();
            next->kind = Node::Kind::binary;
            next->op = c;
            next->lhs = std::move(node);
            next->rhs = factor();
            node = std::move(next);
        }
    }

    std::unique_ptr<Node> factor() {
        // a leading minus applies to the whole power, so -x^2 means -(x^2)
        if (eat('-')) {
            auto node = std::make_unique<Node>();
            node->kind = Node::Kind::negate;
            node->lhs = factor();
            return node;
        }
        return power();
    }

    std::unique_ptr<Node> power() {
        auto base = primary();
        if (!eat('^')) return base;
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::binary;
        node->op = '^';
        node->lhs = std::move(base);
        node->rhs = factor(); // right associative, exponents may carry a sign
        return node;
    }

    std::unique_ptr<Node> primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("expression ends early");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        if (eat('(')) {
            auto inner = expr();
            if (!eat(')')) fail("missing closing parenthesis");
            return inner;
        }
        fail("expected a number, name, or parenthesis");
    }

    std::unique_ptr<Node> number() {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(text_.substr(pos_), &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        auto node = std::make_unique<Node>();
        node->kind = Node::Kind::number;
        node->value = v;
        return node;
    }

    std::unique_ptr<Node> name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string word = text_.substr(start, pos_ - start);

        if (eat('(')) {
            static const std::pair<const char*, Fn> fns[] = {
                {"sin", Fn::sin}, {"cos", Fn::cos},   {"tan", Fn::tan}, {"exp", Fn::exp},
                {"log", Fn::log}, {"sqrt", Fn::sqrt}, {"abs", Fn::abs}};
            for (const auto& [fname, fn] : fns) {
                if (word == fname) {
                    auto node = std::make_unique<Node>();
                    node->kind = Node::Kind::call;
                    node->fn = fn;
                    node->lhs = expr();
                    if (!eat(')')) fail("missing closing parenthesis");
                    return node;
                }
            }
            fail("unknown function \"" + word + "\"");
        }

        if (word == "pi") {
            auto node = std::make_unique<Node>();
            node->kind = Node::Kind::number;
            node->value = std::acos(-1.0);
            return node;
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (word == vars_[i]) {
                auto node = std::make_unique<Node>();
                node->kind = Node::Kind::variable;
                node->slot = i;
                return node;
            }
        }
        fail("unknown name \"" + word + "\"");
    }
};

} // namespace expr_detail

// A parsed expression bound to a fixed variable layout.  Copyable (levels of
// a study share compiled fields across threads; evaluation is const).
class CompiledExpr {
  public:
    CompiledExpr() = default;
    CompiledExpr(const std::string& text, const std::vector<std::string>& vars)
        : root_(expr_detail::Parser(text, vars).run()), arity_(vars.size()), text_(text) {}

    double operator()(const double* args) const { return root_->eval(args); }
    double operator()(std::initializer_list<double> args) const {
        return root_->eval(args.begin());
    }
    bool valid() const { return root_ != nullptr; }
    std::size_t arity() const { return arity_; }
    const std::string& text() const { return text_; }

  private:
    std::shared_ptr<const expr_detail::Node> root_;
    std::size_t arity_ = 0;
    std::string text_;
};

} // namespace roughflow
