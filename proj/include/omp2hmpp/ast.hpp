#pragma once

// Abstract syntax for the supported C subset.
//
// Nodes are plain values: copying a Stmt deep-copies the subtree, which the
// outliner and inliner rely on when cloning bodies. Children live in vectors so
// the recursive types stay complete.

#include <optional>
#include <string>
#include <vector>

namespace omp2hmpp {

enum class BaseType { Void, Char, Int, Float, Double };

struct TypeSpec {
    BaseType base = BaseType::Int;
    bool is_const = false;

    std::string spelling() const;
    bool operator==(const TypeSpec&) const = default;
};

std::size_t element_size(BaseType t);

enum class ExprKind {
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    Paren,   // kids[0]
    Unary,   // text = op, kids[0]
    Postfix, // text = ++/--, kids[0]
    Binary,  // text = op, kids[0], kids[1]
    Assign,  // text = op (=, +=, ...), kids[0] lvalue, kids[1]
    Ternary, // kids[0] ? kids[1] : kids[2]
    Call,    // text = callee name, kids = arguments
    Index,   // kids[0][kids[1]]
    Cast,    // text = type spelling, kids[0]
    InitList // { kids... }
};

struct Expr {
    ExprKind kind = ExprKind::Ident;
    std::string text;
    std::vector<Expr> kids;
    int line = 0;
    int col = 0;

    static Expr ident(std::string name);
    static Expr int_lit(long long v);
    static Expr unary(std::string op, Expr e);
    static Expr assign(Expr lhs, Expr rhs);
    static Expr call(std::string callee, std::vector<Expr> args);

    bool is_ident() const { return kind == ExprKind::Ident; }
    bool operator==(const Expr&) const = default;
};

struct Declarator {
    std::string name;
    int pointer = 0;
    bool reference = false;
    /// One entry per `[...]`; nullopt for an empty `[]`.
    std::vector<std::optional<Expr>> dims;
    std::optional<Expr> init;
    int line = 0;
    int col = 0;

    bool operator==(const Declarator&) const = default;
};

enum class PragmaFamily { Omp, Hmpp, Hmppcg };

struct Pragma {
    PragmaFamily family = PragmaFamily::Omp;
    /// Text after `#pragma`, continuation lines joined, spelling canonicalized.
    std::string text;
    int line = 0;
    int col = 0;

    bool operator==(const Pragma&) const = default;
};

enum class StmtKind {
    Compound,  // children = statements
    Decl,      // type + decls
    Expr,      // expr
    Empty,     // ;
    If,        // expr = condition, children[0] = then, children[1] = else (optional)
    For,       // children[0] = init (Decl/Expr/Empty), children[1] = body, expr = cond, step
    While,     // expr = condition, children[0] = body
    Return,    // expr optional
    Break,
    Continue,
    Directive  // standalone HMPP directive; pragmas[0] holds it
};

struct Stmt {
    StmtKind kind = StmtKind::Empty;
    int id = -1;
    int line = 0;
    int col = 0;
    std::vector<Pragma> pragmas;
    std::vector<Stmt> children;
    std::optional<Expr> expr;
    std::optional<Expr> step;
    TypeSpec type;
    std::vector<Declarator> decls;

    static Stmt compound(std::vector<Stmt> body);
    static Stmt expr_stmt(Expr e);
    static Stmt decl(TypeSpec t, Declarator d);
    static Stmt directive(Pragma p);

    bool is_loop() const { return kind == StmtKind::For || kind == StmtKind::While; }
    Stmt& body() { return kind == StmtKind::For ? children[1] : children[0]; }
    const Stmt& body() const { return kind == StmtKind::For ? children[1] : children[0]; }

    bool operator==(const Stmt&) const = default;
};

struct Param {
    TypeSpec type;
    Declarator decl;

    bool operator==(const Param&) const = default;
};

struct FunctionDef {
    TypeSpec ret;
    int ret_pointer = 0;
    std::string name;
    std::vector<Param> params;
    bool variadic = false;
    /// nullopt for a prototype.
    std::optional<Stmt> body;
    std::vector<Pragma> pragmas;
    int line = 0;
    int col = 0;

    bool operator==(const FunctionDef&) const = default;
};

struct TopItem {
    enum class Kind { Global, Function } kind = Kind::Global;
    Stmt global; // a Decl statement
    FunctionDef fn;

    bool operator==(const TopItem&) const = default;
};

struct SourceUnit {
    std::string file;
    std::vector<TopItem> items;

    FunctionDef* find_function(const std::string& name);
    const FunctionDef* find_function(const std::string& name) const;
    /// The definition (with body) if present, otherwise the first prototype.
    const FunctionDef* find_definition(const std::string& name) const;

    bool operator==(const SourceUnit&) const = default;
};

// Traversal helpers. Visit order is source order (pre-order).
template <class F> void for_each_expr(const Expr& e, F&& f)
{
    f(e);
    for (const auto& k : e.kids) for_each_expr(k, f);
}

template <class F> void for_each_stmt(const Stmt& s, F&& f)
{
    f(s);
    for (const auto& c : s.children) for_each_stmt(c, f);
}

template <class F> void for_each_stmt(Stmt& s, F&& f)
{
    f(s);
    for (auto& c : s.children) for_each_stmt(c, f);
}

/// Every expression directly owned by `s` (not by its child statements), in
/// evaluation-ish source order: declarator dims and initializers, condition,
/// expression, step.
template <class F> void for_each_own_expr(const Stmt& s, F&& f)
{
    for (const auto& d : s.decls) {
        for (const auto& dim : d.dims)
            if (dim) f(*dim);
        if (d.init) f(*d.init);
    }
    if (s.expr) f(*s.expr);
    if (s.step) f(*s.step);
}

template <class F> void for_each_own_expr(Stmt& s, F&& f)
{
    for (auto& d : s.decls) {
        for (auto& dim : d.dims)
            if (dim) f(*dim);
        if (d.init) f(*d.init);
    }
    if (s.expr) f(*s.expr);
    if (s.step) f(*s.step);
}

/// Assigns pre-order ids starting at `next`; returns the next free id.
int number_statements(Stmt& s, int next);
int number_statements(SourceUnit& u);

Stmt* find_stmt(Stmt& root, int id);
const Stmt* find_stmt(const Stmt& root, int id);

} // namespace omp2hmpp
