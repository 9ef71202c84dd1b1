#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/directives.hpp"

#include <sstream>

namespace omp2hmpp {

namespace {

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 4, ' '); }

std::string declarator_text(const Declarator& d)
{
    std::string s(static_cast<std::size_t>(d.pointer), '*');
    if (d.reference) s += '&';
    s += d.name;
    for (const auto& dim : d.dims) s += "[" + (dim ? print_expr(*dim) : std::string()) + "]";
    if (d.init) s += " = " + print_expr(*d.init);
    return s;
}

std::string decl_text(const Stmt& s)
{
    std::string out = s.type.spelling() + " ";
    for (std::size_t i = 0; i < s.decls.size(); ++i) {
        if (i) out += ", ";
        out += declarator_text(s.decls[i]);
    }
    return out + ";";
}

void pragma_lines(std::ostringstream& os, const std::vector<Pragma>& ps, int indent)
{
    for (const auto& p : ps)
        for (const auto& line : wrap_pragma_text(p.text)) os << pad(indent) << line << '\n';
}

void stmt_into(std::ostringstream& os, const Stmt& s, int indent);

// Body of if/for/while: compounds stay on the header line.
void body_into(std::ostringstream& os, const Stmt& body, int indent)
{
    if (body.kind == StmtKind::Compound && body.pragmas.empty()) {
        os << " {\n";
        for (const auto& c : body.children) stmt_into(os, c, indent + 1);
        os << pad(indent) << "}";
    } else {
        std::ostringstream inner;
        stmt_into(inner, body, indent + 1);
        std::string t = inner.str();
        if (!t.empty() && t.back() == '\n') t.pop_back();
        os << '\n' << t;
    }
}

std::string for_init_text(const Stmt& init)
{
    switch (init.kind) {
    case StmtKind::Decl: return decl_text(init);
    case StmtKind::Expr: return print_expr(*init.expr) + ";";
    default: return ";";
    }
}

void stmt_into(std::ostringstream& os, const Stmt& s, int indent)
{
    if (s.kind == StmtKind::Directive) {
        pragma_lines(os, s.pragmas, indent);
        return;
    }
    pragma_lines(os, s.pragmas, indent);
    os << pad(indent);
    switch (s.kind) {
    case StmtKind::Compound:
        os << "{\n";
        for (const auto& c : s.children) stmt_into(os, c, indent + 1);
        os << pad(indent) << "}";
        break;
    case StmtKind::Decl: os << decl_text(s); break;
    case StmtKind::Expr: os << print_expr(*s.expr) << ";"; break;
    case StmtKind::Empty: os << ";"; break;
    case StmtKind::If: {
        os << "if (" << print_expr(*s.expr) << ")";
        body_into(os, s.children[0], indent);
        if (s.children.size() > 1) {
            bool inline_else = s.children[0].kind == StmtKind::Compound && s.children[0].pragmas.empty();
            os << (inline_else ? " else" : "\n" + pad(indent) + "else");
            body_into(os, s.children[1], indent);
        }
        break;
    }
    case StmtKind::For: {
        os << "for (" << for_init_text(s.children[0]);
        if (s.expr) os << " " << print_expr(*s.expr);
        os << ";";
        if (s.step) os << " " << print_expr(*s.step);
        os << ")";
        body_into(os, s.children[1], indent);
        break;
    }
    case StmtKind::While:
        os << "while (" << print_expr(*s.expr) << ")";
        body_into(os, s.children[0], indent);
        break;
    case StmtKind::Return:
        os << "return";
        if (s.expr) os << " " << print_expr(*s.expr);
        os << ";";
        break;
    case StmtKind::Break: os << "break;"; break;
    case StmtKind::Continue: os << "continue;"; break;
    case StmtKind::Directive: break;
    }
    os << '\n';
}

std::string params_text(const FunctionDef& fn)
{
    std::string s;
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        if (i) s += ", ";
        const auto& p = fn.params[i];
        s += p.type.spelling();
        std::string d = declarator_text(p.decl);
        if (!d.empty()) s += " " + d;
    }
    if (fn.variadic) s += fn.params.empty() ? "..." : ", ...";
    return s;
}

} // namespace

std::string print_expr(const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Ident:
    case ExprKind::IntLit:
    case ExprKind::FloatLit:
    case ExprKind::StrLit:
    case ExprKind::CharLit: return e.text;
    case ExprKind::Paren: return "(" + print_expr(e.kids[0]) + ")";
    case ExprKind::Unary: {
        std::string inner = print_expr(e.kids[0]);
        // Keep `- -x` and `& &x` from fusing into one token.
        bool sep = !inner.empty() && (e.text == "-" || e.text == "+" || e.text == "&") && inner[0] == e.text[0];
        return e.text + (sep ? " " : "") + inner;
    }
    case ExprKind::Postfix: return print_expr(e.kids[0]) + e.text;
    case ExprKind::Binary:
    case ExprKind::Assign: return print_expr(e.kids[0]) + " " + e.text + " " + print_expr(e.kids[1]);
    case ExprKind::Ternary:
        return print_expr(e.kids[0]) + " ? " + print_expr(e.kids[1]) + " : " + print_expr(e.kids[2]);
    case ExprKind::Call: {
        std::string s = e.text + "(";
        for (std::size_t i = 0; i < e.kids.size(); ++i) s += (i ? ", " : "") + print_expr(e.kids[i]);
        return s + ")";
    }
    case ExprKind::Index: return print_expr(e.kids[0]) + "[" + print_expr(e.kids[1]) + "]";
    case ExprKind::Cast: return "(" + e.text + ")" + print_expr(e.kids[0]);
    case ExprKind::InitList: {
        std::string s = "{";
        for (std::size_t i = 0; i < e.kids.size(); ++i) s += (i ? ", " : "") + print_expr(e.kids[i]);
        return s + "}";
    }
    }
    return {};
}

std::string print_stmt(const Stmt& s, int indent)
{
    std::ostringstream os;
    stmt_into(os, s, indent);
    return os.str();
}

std::string print_function(const FunctionDef& fn)
{
    std::ostringstream os;
    pragma_lines(os, fn.pragmas, 0);
    os << fn.ret.spelling() << " " << std::string(static_cast<std::size_t>(fn.ret_pointer), '*') << fn.name << "("
       << params_text(fn) << ")";
    if (!fn.body) {
        os << ";\n";
        return os.str();
    }
    os << "\n{\n";
    for (const auto& c : fn.body->children) stmt_into(os, c, 1);
    os << "}\n";
    return os.str();
}

std::string print_unit(const SourceUnit& unit)
{
    std::ostringstream os;
    bool prev_fn = false;
    for (std::size_t i = 0; i < unit.items.size(); ++i) {
        const auto& it = unit.items[i];
        if (it.kind == TopItem::Kind::Global) {
            if (prev_fn) os << '\n';
            os << print_stmt(it.global, 0);
            prev_fn = false;
        } else {
            if (i > 0) os << '\n';
            os << print_function(it.fn);
            prev_fn = true;
        }
    }
    return os.str();
}

namespace {

void strip_stmt(Stmt& s)
{
    s.pragmas.clear();
    std::vector<Stmt> kept;
    kept.reserve(s.children.size());
    for (auto& c : s.children) {
        if (c.kind == StmtKind::Directive) continue;
        strip_stmt(c);
        kept.push_back(std::move(c));
    }
    s.children = std::move(kept);
}

} // namespace

SourceUnit strip_pragmas(SourceUnit unit)
{
    for (auto& it : unit.items) {
        if (it.kind == TopItem::Kind::Global) {
            strip_stmt(it.global);
        } else {
            it.fn.pragmas.clear();
            if (it.fn.body) strip_stmt(*it.fn.body);
        }
    }
    return unit;
}

std::size_t count_pragmas(const SourceUnit& unit)
{
    std::size_t n = 0;
    auto count = [&](const Stmt& root) { for_each_stmt(root, [&](const Stmt& s) { n += s.pragmas.size(); }); };
    for (const auto& it : unit.items) {
        if (it.kind == TopItem::Kind::Global) {
            count(it.global);
        } else {
            n += it.fn.pragmas.size();
            if (it.fn.body) count(*it.fn.body);
        }
    }
    return n;
}

} // namespace omp2hmpp
