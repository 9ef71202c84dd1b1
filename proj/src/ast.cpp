#include "omp2hmpp/ast.hpp"
#include "omp2hmpp/diagnostic.hpp"

#include <sstream>

namespace omp2hmpp {

std::string Diagnostic::str() const
{
    std::ostringstream os;
    os << (file.empty() ? "<input>" : file) << ':' << line << ':' << col << ": " << message;
    return os.str();
}

static std::string join_messages(const std::vector<Diagnostic>& ds)
{
    std::string out;
    for (const auto& d : ds) {
        if (!out.empty()) out += '\n';
        out += d.str();
    }
    return out;
}

CompileError::CompileError(Diagnostic d) : CompileError(std::vector<Diagnostic>{std::move(d)}) {}

CompileError::CompileError(std::vector<Diagnostic> ds)
    : std::runtime_error(join_messages(ds)), diags_(std::move(ds))
{
}

void fail(int line, int col, const std::string& message)
{
    throw CompileError(Diagnostic{"", line, col, message});
}

std::string TypeSpec::spelling() const
{
    std::string s = is_const ? "const " : "";
    switch (base) {
    case BaseType::Void: return s + "void";
    case BaseType::Char: return s + "char";
    case BaseType::Int: return s + "int";
    case BaseType::Float: return s + "float";
    case BaseType::Double: return s + "double";
    }
    return s;
}

std::size_t element_size(BaseType t)
{
    switch (t) {
    case BaseType::Char: return 1;
    case BaseType::Int: return 4;
    case BaseType::Float: return 4;
    case BaseType::Double: return 8;
    case BaseType::Void: return 0;
    }
    return 0;
}

Expr Expr::ident(std::string name)
{
    Expr e;
    e.kind = ExprKind::Ident;
    e.text = std::move(name);
    return e;
}

Expr Expr::int_lit(long long v)
{
    Expr e;
    e.kind = ExprKind::IntLit;
    e.text = std::to_string(v);
    return e;
}

Expr Expr::unary(std::string op, Expr inner)
{
    Expr e;
    e.kind = ExprKind::Unary;
    e.text = std::move(op);
    e.kids.push_back(std::move(inner));
    return e;
}

Expr Expr::assign(Expr lhs, Expr rhs)
{
    Expr e;
    e.kind = ExprKind::Assign;
    e.text = "=";
    e.kids.push_back(std::move(lhs));
    e.kids.push_back(std::move(rhs));
    return e;
}

Expr Expr::call(std::string callee, std::vector<Expr> args)
{
    Expr e;
    e.kind = ExprKind::Call;
    e.text = std::move(callee);
    e.kids = std::move(args);
    return e;
}

Stmt Stmt::compound(std::vector<Stmt> body)
{
    Stmt s;
    s.kind = StmtKind::Compound;
    s.children = std::move(body);
    return s;
}

Stmt Stmt::expr_stmt(Expr e)
{
    Stmt s;
    s.kind = StmtKind::Expr;
    s.expr = std::move(e);
    return s;
}

Stmt Stmt::decl(TypeSpec t, Declarator d)
{
    Stmt s;
    s.kind = StmtKind::Decl;
    s.type = t;
    s.decls.push_back(std::move(d));
    return s;
}

Stmt Stmt::directive(Pragma p)
{
    Stmt s;
    s.kind = StmtKind::Directive;
    s.line = p.line;
    s.pragmas.push_back(std::move(p));
    return s;
}

FunctionDef* SourceUnit::find_function(const std::string& name)
{
    FunctionDef* proto = nullptr;
    for (auto& it : items) {
        if (it.kind != TopItem::Kind::Function || it.fn.name != name) continue;
        if (it.fn.body) return &it.fn;
        if (!proto) proto = &it.fn;
    }
    return proto;
}

const FunctionDef* SourceUnit::find_function(const std::string& name) const
{
    return const_cast<SourceUnit*>(this)->find_function(name);
}

const FunctionDef* SourceUnit::find_definition(const std::string& name) const
{
    for (const auto& it : items)
        if (it.kind == TopItem::Kind::Function && it.fn.name == name && it.fn.body) return &it.fn;
    return nullptr;
}

int number_statements(Stmt& s, int next)
{
    s.id = next++;
    for (auto& c : s.children) next = number_statements(c, next);
    return next;
}

int number_statements(SourceUnit& u)
{
    int next = 0;
    for (auto& it : u.items) {
        if (it.kind == TopItem::Kind::Global)
            next = number_statements(it.global, next);
        else if (it.fn.body)
            next = number_statements(*it.fn.body, next);
    }
    return next;
}

Stmt* find_stmt(Stmt& root, int id)
{
    if (root.id == id) return &root;
    for (auto& c : root.children)
        if (Stmt* s = find_stmt(c, id)) return s;
    return nullptr;
}

const Stmt* find_stmt(const Stmt& root, int id)
{
    return find_stmt(const_cast<Stmt&>(root), id);
}

} // namespace omp2hmpp
