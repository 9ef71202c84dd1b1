#include "omp2hmpp/transform.hpp"

#include <algorithm>
#include <functional>

namespace omp2hmpp {

namespace {

[[noreturn]] void fail_at(const std::string& file, int line, int col, const std::string& msg)
{
    throw CompileError(Diagnostic{file, line, col, msg});
}

struct Capture {
    int y = 0;
    Expr call;
    int line = 0;
};

// Calls are hoisted only when always evaluated; under && || ?: they are not.
void reject_conditional_calls(const Expr& e, const std::set<std::string>& callees, const std::string& file)
{
    auto contains_call = [&](const Expr& x) {
        const Expr* hit = nullptr;
        for_each_expr(x, [&](const Expr& k) {
            if (!hit && k.kind == ExprKind::Call && callees.count(k.text)) hit = &k;
        });
        return hit;
    };
    for_each_expr(e, [&](const Expr& k) {
        std::size_t first = 0;
        if (k.kind == ExprKind::Binary && (k.text == "&&" || k.text == "||")) first = 1;
        else if (k.kind == ExprKind::Ternary) first = 1;
        else return;
        for (std::size_t i = first; i < k.kids.size(); ++i)
            if (const Expr* c = contains_call(k.kids[i]))
                fail_at(file, c->line, c->col,
                        "call to '" + c->text + "' under '" + (k.kind == ExprKind::Ternary ? "?:" : k.text) +
                            "' cannot be inlined: it is not always evaluated");
    });
}

void hoist(Expr& e, const std::set<std::string>& callees, int& next, std::vector<Capture>& out)
{
    for (auto& k : e.kids) hoist(k, callees, next, out);
    if (e.kind != ExprKind::Call || !callees.count(e.text)) return;
    Capture c;
    c.y = next++;
    c.line = e.line;
    c.call = e;
    out.push_back(c);
    Expr r = Expr::ident("_return_" + std::to_string(c.y));
    r.line = e.line;
    r.col = e.col;
    e = std::move(r);
}

bool has_call(const Stmt& s, const std::set<std::string>& callees)
{
    bool found = false;
    for_each_own_expr(s, [&](const Expr& e) {
        for_each_expr(e, [&](const Expr& k) {
            if (k.kind == ExprKind::Call && callees.count(k.text)) found = true;
        });
    });
    return found;
}

// Captures plus the recombined statement (nullopt when it reduces to `_return_y;`).
std::pair<std::vector<Capture>, std::optional<Stmt>> split(const Stmt& stmt, int& next,
                                                           const std::set<std::string>& callees,
                                                           const std::string& file)
{
    Stmt s = stmt;
    std::vector<Capture> caps;
    switch (s.kind) {
    case StmtKind::Expr:
    case StmtKind::Decl:
    case StmtKind::Return:
    case StmtKind::If: break;
    default: fail_at(file, s.line, s.col, "calls here cannot be split for inlining");
    }
    for_each_own_expr(s, [&](Expr& e) {
        reject_conditional_calls(e, callees, file);
        hoist(e, callees, next, caps);
    });
    if (s.kind == StmtKind::Expr && s.expr && s.expr->is_ident() && !caps.empty() &&
        s.expr->text == "_return_" + std::to_string(caps.back().y))
        return {caps, std::nullopt};
    return {caps, s};
}

TypeSpec return_type(const SourceUnit& unit, const std::string& f, int& pointer)
{
    const FunctionDef* d = unit.find_definition(f);
    pointer = d ? d->ret_pointer : 0;
    return d ? d->ret : TypeSpec{};
}

Stmt capture_stmt(const SourceUnit& unit, const Capture& c)
{
    int ptr = 0;
    TypeSpec t = return_type(unit, c.call.text, ptr);
    Stmt s;
    if (t.base == BaseType::Void && ptr == 0) {
        s = Stmt::expr_stmt(c.call);
    } else {
        Declarator d;
        d.name = "_return_" + std::to_string(c.y);
        d.pointer = ptr;
        d.init = c.call;
        d.line = c.line;
        s = Stmt::decl(t, d);
    }
    s.line = c.line;
    return s;
}

// Replace identifier uses according to `map`; `*p` replacements get parens
// where a postfix operator would otherwise bind to the pointer.
void substitute(Expr& e, const std::map<std::string, Expr>& map, const Expr* parent = nullptr)
{
    if (e.is_ident()) {
        auto it = map.find(e.text);
        if (it == map.end()) return;
        Expr r = it->second;
        r.line = e.line;
        r.col = e.col;
        bool deref = r.kind == ExprKind::Unary;
        if (deref && parent && (parent->kind == ExprKind::Postfix || parent->kind == ExprKind::Index)) {
            Expr p;
            p.kind = ExprKind::Paren;
            p.kids.push_back(std::move(r));
            r = std::move(p);
        }
        e = std::move(r);
        return;
    }
    for (auto& k : e.kids) substitute(k, map, &e);
}

void substitute(Stmt& s, const std::map<std::string, Expr>& map)
{
    for_each_stmt(s, [&](Stmt& x) { for_each_own_expr(x, [&](Expr& e) { substitute(e, map); }); });
}

const Expr* lvalue_root(const Expr& e)
{
    const Expr* p = &e;
    for (;;) {
        if (p->kind == ExprKind::Paren || p->kind == ExprKind::Index) p = &p->kids[0];
        else break;
    }
    return p->is_ident() ? p : nullptr;
}

class Inliner {
  public:
    Inliner(const SourceUnit& unit, const InlineOptions& opts) : unit_(unit), opts_(opts)
    {
        if (opts.functions.empty()) {
            for (const auto& it : unit.items)
                if (it.kind == TopItem::Kind::Function && it.fn.body && it.fn.name != "main")
                    callees_.insert(it.fn.name);
        } else {
            for (const auto& f : opts.functions) {
                const FunctionDef* d = unit.find_definition(f);
                if (!d || !d->body) fail_at(unit.file, 0, 0, "cannot inline '" + f + "': no definition");
                callees_.insert(f);
            }
        }
        for (const auto& it : unit.items) {
            if (it.kind == TopItem::Kind::Function && it.fn.body)
                for_each_stmt(*it.fn.body, [&](const Stmt& s) { next_id_ = std::max(next_id_, s.id + 1); });
            else if (it.kind == TopItem::Kind::Global)
                next_id_ = std::max(next_id_, it.global.id + 1);
        }
    }

    std::pair<SourceUnit, InlineReport> run()
    {
        SourceUnit out = unit_;
        for (auto& it : out.items) {
            if (it.kind != TopItem::Kind::Function || !it.fn.body) continue;
            bool active = !opts_.within.has_value();
            process_list(*it.fn.body, active, {it.fn.name});
        }
        finish(out);
        return {std::move(out), std::move(report_)};
    }

  private:
    bool activates(const Stmt& s) const { return opts_.within && opts_.within->count(s.id); }

    void process_list(Stmt& compound, bool active, const std::vector<std::string>& stack)
    {
        std::vector<Stmt> body;
        for (auto& c : compound.children) {
            auto v = process_one(c, active || activates(c), stack);
            for (auto& x : v) body.push_back(std::move(x));
        }
        compound.children = std::move(body);
    }

    void process_body(Stmt& body, bool active, const std::vector<std::string>& stack)
    {
        if (body.kind == StmtKind::Compound) {
            process_list(body, active || activates(body), stack);
            return;
        }
        auto v = process_one(body, active || activates(body), stack);
        if (v.size() == 1) {
            body = std::move(v[0]);
            return;
        }
        Stmt c = Stmt::compound(std::move(v));
        c.id = next_id_++;
        c.line = c.children.empty() ? 0 : c.children.front().line;
        body = std::move(c);
    }

    std::vector<Stmt> process_one(Stmt& s, bool active, const std::vector<std::string>& stack)
    {
        std::vector<Stmt> out;
        if (!active) {
            recurse(s, false, stack);
            out.push_back(std::move(s));
            return out;
        }
        if (s.is_loop()) {
            bool header = has_call(s, callees_) || (s.kind == StmtKind::For && has_call(s.children[0], callees_));
            if (header)
                fail_at(unit_.file, s.line, s.col,
                        "call in a loop header cannot be inlined; move it into the loop body");
        }
        if (s.kind != StmtKind::Compound && !s.is_loop() && has_call(s, callees_)) {
            auto [caps, final] = split(s, y_, callees_, unit_.file);
            for (const auto& c : caps) expand(c, stack, out);
            if (final) {
                recurse(*final, true, stack);
                out.push_back(std::move(*final));
            }
            return out;
        }
        recurse(s, true, stack);
        out.push_back(std::move(s));
        return out;
    }

    void recurse(Stmt& s, bool active, const std::vector<std::string>& stack)
    {
        switch (s.kind) {
        case StmtKind::Compound: process_list(s, active, stack); break;
        case StmtKind::If:
            for (auto& c : s.children) process_body(c, active, stack);
            break;
        case StmtKind::For: process_body(s.children[1], active, stack); break;
        case StmtKind::While: process_body(s.children[0], active, stack); break;
        default: break;
        }
    }

    void expand(const Capture& c, const std::vector<std::string>& stack, std::vector<Stmt>& out)
    {
        const std::string& f = c.call.text;
        if (std::find(stack.begin(), stack.end(), f) != stack.end())
            fail_at(unit_.file, c.call.line, c.call.col, "recursive function '" + f + "' cannot be inlined");
        const FunctionDef& def = *unit_.find_definition(f);
        if (def.variadic || c.call.kids.size() != def.params.size())
            fail_at(unit_.file, c.call.line, c.call.col, "call to '" + f + "' does not match its definition");
        if (std::find(report_.inlined.begin(), report_.inlined.end(), f) == report_.inlined.end())
            report_.inlined.push_back(f);
        const std::string y = std::to_string(c.y);

        std::vector<Stmt> pre;
        std::map<std::string, Expr> rename;
        for (std::size_t i = 0; i < def.params.size(); ++i) {
            const Param& p = def.params[i];
            const Expr& arg = c.call.kids[i];
            std::string name = "_p_" + std::to_string(i) + "_" + f + "_" + y;
            bool array = !p.decl.dims.empty() || p.decl.pointer > 0;
            if (array && arg.is_ident()) {
                rename[p.decl.name] = arg;
                continue;
            }
            Declarator d;
            d.name = name;
            d.line = c.line;
            if (p.decl.reference) {
                if (!lvalue_root(arg))
                    fail_at(unit_.file, arg.line, arg.col,
                            "argument for reference parameter '" + p.decl.name + "' of '" + f + "' is not an lvalue");
                d.pointer = p.decl.pointer + 1;
                d.init = Expr::unary("&", arg);
                rename[p.decl.name] = Expr::unary("*", Expr::ident(name));
            } else if (array) {
                if (p.decl.dims.size() + p.decl.pointer != 1)
                    fail_at(unit_.file, arg.line, arg.col,
                            "multi-dimensional argument for '" + p.decl.name + "' of '" + f +
                                "' must be a plain array name");
                d.pointer = 1;
                d.init = arg;
                rename[p.decl.name] = Expr::ident(name);
            } else {
                d.pointer = 0;
                d.init = arg;
                rename[p.decl.name] = Expr::ident(name);
            }
            Stmt ds = Stmt::decl(p.type, d);
            ds.type.is_const = false;
            ds.line = c.line;
            pre.push_back(std::move(ds));
        }

        bool has_value = !(def.ret.base == BaseType::Void && def.ret_pointer == 0);
        if (has_value) {
            Declarator d;
            d.name = "_return_" + y;
            d.pointer = def.ret_pointer;
            d.line = c.line;
            Stmt ds = Stmt::decl(def.ret, d);
            ds.type.is_const = false;
            ds.line = c.line;
            pre.push_back(std::move(ds));
        }

        Stmt block = *def.body;
        substitute(block, rename);
        // only a trailing return can become a plain assignment
        std::optional<Stmt> tail;
        if (!block.children.empty() && block.children.back().kind == StmtKind::Return) {
            tail = std::move(block.children.back());
            block.children.pop_back();
        }
        for_each_stmt(block, [&](const Stmt& s) {
            if (s.kind == StmtKind::Return)
                fail_at(unit_.file, s.line, s.col,
                        "'" + f + "' has a return before its end and cannot be inlined");
        });
        if (has_value && tail && tail->expr) {
            std::string ret = "ret_" + f + y;
            Declarator d;
            d.name = ret;
            d.pointer = def.ret_pointer;
            Stmt rd = Stmt::decl(def.ret, d);
            rd.type.is_const = false;
            rd.line = tail->line;
            Stmt ra = Stmt::expr_stmt(Expr::assign(Expr::ident(ret), *tail->expr));
            ra.line = tail->line;
            Stmt rr = Stmt::expr_stmt(Expr::assign(Expr::ident("_return_" + y), Expr::ident(ret)));
            rr.line = tail->line;
            block.children.push_back(std::move(rd));
            block.children.push_back(std::move(ra));
            block.children.push_back(std::move(rr));
        }
        block.pragmas.clear();
        for_each_stmt(block, [](Stmt& s) { s.pragmas.clear(); });
        block.line = c.line;

        for (auto& p : pre) {
            p.id = next_id_++;
            out.push_back(std::move(p));
        }
        next_id_ = number_statements(block, next_id_);
        auto inner = stack;
        inner.push_back(f);
        process_list(block, true, inner);
        out.push_back(std::move(block));
    }

    void finish(SourceUnit& out)
    {
        report_.calls = y_;
        // fully inlined = inlined at least once and no call left in a surviving function
        std::set<std::string> removed(report_.inlined.begin(), report_.inlined.end());
        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& it : out.items) {
                if (it.kind != TopItem::Kind::Function || !it.fn.body || removed.count(it.fn.name)) continue;
                for_each_stmt(*it.fn.body, [&](const Stmt& s) {
                    for_each_own_expr(s, [&](const Expr& e) {
                        for_each_expr(e, [&](const Expr& k) {
                            if (k.kind == ExprKind::Call && removed.count(k.text)) {
                                removed.erase(k.text);
                                changed = true;
                            }
                        });
                    });
                });
            }
        }
        std::vector<TopItem> items;
        for (auto& it : out.items) {
            if (it.kind != TopItem::Kind::Function || !removed.count(it.fn.name)) {
                items.push_back(std::move(it));
                continue;
            }
            if (!it.fn.body) continue; // prototype
            std::string marker = "deletedFunctionBodyNamed_" + it.fn.name;
            Declarator d;
            d.name = marker;
            d.init = Expr::int_lit(1);
            d.line = it.fn.line;
            TopItem g;
            g.kind = TopItem::Kind::Global;
            g.global = Stmt::decl(TypeSpec{}, d);
            g.global.line = it.fn.line;
            g.global.id = next_id_++;
            items.push_back(std::move(g));
            report_.removed.push_back(it.fn.name);
            report_.markers.push_back(marker);
        }
        out.items = std::move(items);
    }

    const SourceUnit& unit_;
    const InlineOptions& opts_;
    std::set<std::string> callees_;
    int next_id_ = 0;
    int y_ = 0;
    InlineReport report_;
};

} // namespace

std::vector<Stmt> split_multi_call_expr(const Stmt& stmt, int& next, const SourceUnit& unit,
                                        const std::set<std::string>& callees)
{
    std::set<std::string> names = callees;
    if (names.empty())
        for (const auto& it : unit.items)
            if (it.kind == TopItem::Kind::Function && it.fn.body) names.insert(it.fn.name);
    auto [caps, final] = split(stmt, next, names, unit.file);
    std::vector<Stmt> out;
    for (const auto& c : caps) out.push_back(capture_stmt(unit, c));
    if (final) out.push_back(std::move(*final));
    return out;
}

std::pair<SourceUnit, InlineReport> inline_calls(const SourceUnit& unit, const InlineOptions& opts)
{
    return Inliner(unit, opts).run();
}

} // namespace omp2hmpp
