#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace larvae {

/// Name/value bindings for expression evaluation. Small and flat: scenario
/// expressions use a handful of variables (a, t, T, the *_star constants).
class VarTable {
public:
    VarTable() = default;
    VarTable(std::initializer_list<std::pair<std::string, double>> init) {
        for (auto& kv : init) set(kv.first, kv.second);
    }

    void set(const std::string& name, double value);
    bool has(const std::string& name) const;
    double get(const std::string& name) const;  // throws ValidationError if absent

private:
    std::vector<std::pair<std::string, double>> entries_;
};

namespace detail {
struct ExprNode;
}

/// Arithmetic expression over named variables, parsed once and evaluated many
/// times. Supports + - * / ^, unary minus, parentheses, the functions sin,
/// cos, tan, exp, log/ln, sqrt, abs, min, max, pow, and the constants pi, e.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text);
    static Expression constant(double value);

    double eval(const VarTable& vars) const;
    bool empty() const { return root_ == nullptr; }
    const std::string& text() const { return text_; }

private:
    std::shared_ptr<const detail::ExprNode> root_;
    std::string text_;
};

}  // namespace larvae
