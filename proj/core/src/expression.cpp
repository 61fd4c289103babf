#include "larvae/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "larvae/errors.hpp"

namespace larvae {

void VarTable::set(const std::string& name, double value) {
    for (auto& kv : entries_) {
        if (kv.first == name) {
            kv.second = value;
            return;
        }
    }
    entries_.emplace_back(name, value);
}

bool VarTable::has(const std::string& name) const {
    for (const auto& kv : entries_)
        if (kv.first == name) return true;
    return false;
}

double VarTable::get(const std::string& name) const {
    for (const auto& kv : entries_)
        if (kv.first == name) return kv.second;
    throw ValidationError("expression references unknown variable '" + name + "'");
}

namespace detail {

enum class Op {
    Number,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Call1,
    Call2,
};

struct ExprNode {
    Op op = Op::Number;
    double value = 0.0;
    std::string name;                       // variable or function name
    std::shared_ptr<const ExprNode> lhs;
    std::shared_ptr<const ExprNode> rhs;
};

using NodePtr = std::shared_ptr<const ExprNode>;

double eval_node(const ExprNode& n, const VarTable& vars) {
    switch (n.op) {
        case Op::Number:
            return n.value;
        case Op::Variable:
            if (n.name == "pi") return M_PI;
            if (n.name == "e") return M_E;
            return vars.get(n.name);
        case Op::Add:
            return eval_node(*n.lhs, vars) + eval_node(*n.rhs, vars);
        case Op::Sub:
            return eval_node(*n.lhs, vars) - eval_node(*n.rhs, vars);
        case Op::Mul:
            return eval_node(*n.lhs, vars) * eval_node(*n.rhs, vars);
        case Op::Div:
            return eval_node(*n.lhs, vars) / eval_node(*n.rhs, vars);
        case Op::Pow:
            return std::pow(eval_node(*n.lhs, vars), eval_node(*n.rhs, vars));
        case Op::Neg:
            return -eval_node(*n.lhs, vars);
        case Op::Call1: {
            const double x = eval_node(*n.lhs, vars);
            if (n.name == "sin") return std::sin(x);
            if (n.name == "cos") return std::cos(x);
            if (n.name == "tan") return std::tan(x);
            if (n.name == "exp") return std::exp(x);
            if (n.name == "log" || n.name == "ln") return std::log(x);
            if (n.name == "sqrt") return std::sqrt(x);
            if (n.name == "abs") return std::fabs(x);
            throw ValidationError("unknown function '" + n.name + "'");
        }
        case Op::Call2: {
            const double x = eval_node(*n.lhs, vars);
            const double y = eval_node(*n.rhs, vars);
            if (n.name == "min") return std::min(x, y);
            if (n.name == "max") return std::max(x, y);
            if (n.name == "pow") return std::pow(x, y);
            throw ValidationError("unknown function '" + n.name + "'");
        }
    }
    throw ValidationError("corrupt expression node");
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr run() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("expression parse error at position " + std::to_string(pos_) +
                              " in \"" + text_ + "\": " + what);
    }

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

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        return n;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = make(Op::Add, lhs, term());
            else if (accept('-'))
                lhs = make(Op::Sub, lhs, term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = make(Op::Mul, lhs, unary());
            else if (accept('/'))
                lhs = make(Op::Div, lhs, unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::Pow, base, unary());  // right associative
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (accept('(')) {
            NodePtr e = expr();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr number() {
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = std::make_shared<ExprNode>();
        n->op = Op::Number;
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (peek() == '(') {
            accept('(');
            NodePtr a = expr();
            if (accept(',')) {
                NodePtr b = expr();
                if (!accept(')')) fail("expected ')'");
                auto n = std::make_shared<ExprNode>();
                n->op = Op::Call2;
                n->name = std::move(name);
                n->lhs = a;
                n->rhs = b;
                return n;
            }
            if (!accept(')')) fail("expected ')'");
            auto n = std::make_shared<ExprNode>();
            n->op = Op::Call1;
            n->name = std::move(name);
            n->lhs = a;
            return n;
        }
        auto n = std::make_shared<ExprNode>();
        n->op = Op::Variable;
        n->name = std::move(name);
        return n;
    }
};

}  // namespace detail

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = detail::Parser(text).run();
    e.text_ = text;
    return e;
}

Expression Expression::constant(double value) {
    auto n = std::make_shared<detail::ExprNode>();
    n->op = detail::Op::Number;
    n->value = value;
    Expression e;
    e.root_ = std::move(n);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    e.text_ = buf;
    return e;
}

double Expression::eval(const VarTable& vars) const {
    if (!root_) throw ValidationError("evaluating empty expression");
    return detail::eval_node(*root_, vars);
}

}  // namespace larvae
