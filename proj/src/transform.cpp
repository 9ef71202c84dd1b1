#include "omp2hmpp/transform.hpp"
#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/context.hpp"

#include <algorithm>
#include <functional>

namespace omp2hmpp {

namespace {

[[noreturn]] void fail_at(const std::string& file, int line, int col, const std::string& msg)
{
    throw CompileError(Diagnostic{file, line, col, msg});
}

void find_blocks_in(const Stmt& s, const std::string& fn, std::vector<OmpBlock>& out, int region)
{
    int here = region;
    for (const auto& p : s.pragmas) {
        if (p.family != PragmaFamily::Omp) continue;
        OmpBlock b;
        b.index = static_cast<int>(out.size());
        b.function = fn;
        b.stmt_id = s.id;
        b.line = p.line;
        try {
            b.omp = parse_omp_pragma(p.text);
        } catch (const CompileError& e) {
            fail_at("", p.line, p.col, e.diagnostics()[0].message);
        }
        b.check = b.omp.check;
        b.fixed = b.omp.fixed;
        b.region = region;
        if (region >= 0) {
            auto& r = out[static_cast<std::size_t>(region)];
            r.sub_blocks.push_back(b.index);
            if (!b.check && !b.fixed) {
                b.check = r.check;
                b.fixed = r.fixed;
            }
        }
        if ((b.check || b.fixed) && b.omp.kind != OmpKind::Parallel && s.kind != StmtKind::For)
            fail_at("", p.line, p.col, "check/fixed block must be a for loop");
        out.push_back(b);
        if (b.omp.kind == OmpKind::Parallel) here = b.index;
    }
    for (const auto& c : s.children) find_blocks_in(c, fn, out, here);
}

// Scope walk down to `target`; true once found, with `scopes` as visible there.
bool scopes_at(const Stmt& s, int target, std::vector<std::map<std::string, Symbol>>& scopes)
{
    if (s.id == target) return true;
    auto declare = [&](const Stmt& d) {
        for (const auto& dc : d.decls) scopes.back()[dc.name] = Symbol{dc.name, d.type, dc, Storage::Local};
    };
    switch (s.kind) {
    case StmtKind::Compound:
        scopes.emplace_back();
        for (const auto& c : s.children) {
            if (c.id == target) return true;
            if (c.kind == StmtKind::Decl) {
                declare(c);
                continue;
            }
            if (scopes_at(c, target, scopes)) return true;
        }
        scopes.pop_back();
        return false;
    case StmtKind::For:
        scopes.emplace_back();
        if (s.children[0].kind == StmtKind::Decl) declare(s.children[0]);
        if (scopes_at(s.children[1], target, scopes)) return true;
        scopes.pop_back();
        return false;
    default:
        for (const auto& c : s.children)
            if (scopes_at(c, target, scopes)) return true;
        return false;
    }
}

// Visits identifiers in execution order with scope tracking: `use(name)` for
// every identifier that does not resolve to a declaration inside `root`.
class FreeVarWalker {
  public:
    explicit FreeVarWalker(std::function<void(const std::string&)> use) : use_(std::move(use)) {}

    void stmt(const Stmt& s)
    {
        switch (s.kind) {
        case StmtKind::Compound:
            push();
            for (const auto& c : s.children) stmt(c);
            pop();
            return;
        case StmtKind::Decl:
            for (const auto& d : s.decls) {
                for (const auto& dim : d.dims)
                    if (dim) expr(*dim);
                if (d.init) expr(*d.init);
                scopes_.back().insert(d.name);
            }
            return;
        case StmtKind::For:
            push();
            stmt(s.children[0]);
            if (s.expr) expr(*s.expr);
            stmt(s.children[1]);
            if (s.step) expr(*s.step);
            pop();
            return;
        case StmtKind::While:
            if (s.expr) expr(*s.expr);
            stmt(s.children[0]);
            return;
        case StmtKind::If:
            if (s.expr) expr(*s.expr);
            for (const auto& c : s.children) stmt(c);
            return;
        default:
            if (s.expr) expr(*s.expr);
            return;
        }
    }

    void expr(const Expr& e)
    {
        if (e.kind == ExprKind::Ident && !local(e.text)) use_(e.text);
        for (const auto& k : e.kids) expr(k);
    }

    void push() { scopes_.emplace_back(); }
    void pop() { scopes_.pop_back(); }

  private:
    bool local(const std::string& n) const
    {
        for (const auto& s : scopes_)
            if (s.count(n)) return true;
        return false;
    }

    std::function<void(const std::string&)> use_;
    std::vector<std::set<std::string>> scopes_{1};
};

std::string no_spaces(std::string s)
{
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    return s;
}

// ---- liveness of a host scalar after a block ----

enum class First { None, Read, Write };

First first_access(const Stmt& s, const std::string& name, const AccessScanner& scan);

First first_in_accesses(const std::vector<Access>& as, const std::string& name)
{
    for (const auto& a : as)
        if (a.symbol == name) return a.kind == AccessKind::Read ? First::Read : First::Write;
    return First::None;
}

First first_in_list(const std::vector<Stmt>& list, std::size_t from, const std::string& name,
                    const AccessScanner& scan)
{
    for (std::size_t i = from; i < list.size(); ++i) {
        First f = first_access(list[i], name, scan);
        if (f != First::None) return f;
    }
    return First::None;
}

// Write only when it happens unconditionally before any read.
First first_access(const Stmt& s, const std::string& name, const AccessScanner& scan)
{
    switch (s.kind) {
    case StmtKind::Compound: return first_in_list(s.children, 0, name, scan);
    case StmtKind::For: {
        First f = first_access(s.children[0], name, scan);
        if (f != First::None) return f;
        if (s.expr && first_in_accesses(scan.expr(*s.expr), name) != First::None) return First::Read;
        if (first_access(s.children[1], name, scan) == First::Read) return First::Read;
        if (s.step && first_in_accesses(scan.expr(*s.step), name) == First::Read) return First::Read;
        return First::None;
    }
    case StmtKind::While:
        if (s.expr && first_in_accesses(scan.expr(*s.expr), name) != First::None) return First::Read;
        return first_access(s.children[0], name, scan) == First::Read ? First::Read : First::None;
    case StmtKind::If: {
        if (s.expr && first_in_accesses(scan.expr(*s.expr), name) != First::None) return First::Read;
        First a = first_access(s.children[0], name, scan);
        First b = s.children.size() > 1 ? first_access(s.children[1], name, scan) : First::None;
        if (a == First::Read || b == First::Read) return First::Read;
        if (a == First::Write && b == First::Write) return First::Write;
        return First::None;
    }
    case StmtKind::Decl:
        for (const auto& d : s.decls)
            if (d.name == name) return First::Write; // shadowing: the old value is unreachable from here
        return first_in_accesses(scan.stmt(s), name);
    default: return first_in_accesses(scan.stmt(s), name);
    }
}

// Ancestors of `target` (outermost first), each paired with the index of the
// child leading to it.
bool path_to(const Stmt& s, int target, std::vector<std::pair<const Stmt*, std::size_t>>& path)
{
    if (s.id == target) return true;
    for (std::size_t i = 0; i < s.children.size(); ++i) {
        path.emplace_back(&s, i);
        if (path_to(s.children[i], target, path)) return true;
        path.pop_back();
    }
    return false;
}

bool live_after(const FunctionDef& fn, int block, const std::string& name, bool escapes, const AccessScanner& scan)
{
    std::vector<std::pair<const Stmt*, std::size_t>> path;
    if (!path_to(*fn.body, block, path)) return false;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const Stmt& parent = *it->first;
        std::size_t idx = it->second;
        if (parent.kind == StmtKind::Compound) {
            First f = first_in_list(parent.children, idx + 1, name, scan);
            if (f == First::Read) return true;
            if (f == First::Write) return false;
        } else if (parent.is_loop() && &parent.body() == &parent.children[idx]) {
            // next iteration: step, condition, then the body again
            if (parent.step && first_in_accesses(scan.expr(*parent.step), name) == First::Read) return true;
            if (parent.expr && first_in_accesses(scan.expr(*parent.expr), name) == First::Read) return true;
            if (first_access(parent.body(), name, scan) == First::Read) return true;
        }
    }
    return escapes;
}

} // namespace

std::vector<OmpBlock> find_omp_blocks(const SourceUnit& unit)
{
    std::vector<OmpBlock> out;
    for (const auto& it : unit.items) {
        if (it.kind != TopItem::Kind::Function || !it.fn.body) continue;
        try {
            find_blocks_in(*it.fn.body, it.fn.name, out, -1);
        } catch (CompileError& e) {
            auto ds = e.diagnostics();
            for (auto& d : ds) d.file = unit.file;
            throw CompileError(std::move(ds));
        }
    }
    return out;
}

std::map<std::string, Symbol> visible_symbols(const SourceUnit& unit, const FunctionDef& fn, int stmt_id)
{
    std::map<std::string, Symbol> out;
    for (const auto& it : unit.items)
        if (it.kind == TopItem::Kind::Global)
            for (const auto& d : it.global.decls) out[d.name] = Symbol{d.name, it.global.type, d, Storage::Global};
    for (const auto& p : fn.params)
        if (!p.decl.name.empty()) out[p.decl.name] = Symbol{p.decl.name, p.type, p.decl, Storage::Param};
    std::vector<std::map<std::string, Symbol>> scopes;
    if (fn.body) scopes_at(*fn.body, stmt_id, scopes);
    for (const auto& sc : scopes)
        for (const auto& [n, s] : sc) out[n] = s;
    return out;
}

const FunctionDef* function_containing(const SourceUnit& unit, int stmt_id)
{
    for (const auto& it : unit.items)
        if (it.kind == TopItem::Kind::Function && it.fn.body && find_stmt(*it.fn.body, stmt_id)) return &it.fn;
    return nullptr;
}

const CodeletParam* CodeletDef::param_for(const std::string& symbol) const
{
    for (const auto& p : params)
        if (p.symbol == symbol) return &p;
    return nullptr;
}

FunctionDef CodeletDef::to_function() const
{
    FunctionDef f;
    f.ret.base = BaseType::Void;
    f.name = label;
    for (const auto& p : params) f.params.push_back(Param{p.type, p.decl});
    f.body = body;
    return f;
}

std::string codelet_label(int region_line, int line, const std::string& function)
{
    return "_instr_for" + (region_line > 0 ? std::to_string(region_line) : std::string()) + "_ol_" +
           std::to_string(line) + "_" + function;
}

std::string loop_variable(const Stmt& loop)
{
    if (loop.kind != StmtKind::For) return {};
    const Stmt& init = loop.children[0];
    if (init.kind == StmtKind::Decl && !init.decls.empty()) return init.decls[0].name;
    if (init.kind == StmtKind::Expr && init.expr->kind == ExprKind::Assign && init.expr->kids[0].is_ident())
        return init.expr->kids[0].text;
    return {};
}

std::vector<std::string> gridify_spec(const Stmt& block, bool reduction)
{
    if (block.kind != StmtKind::For) return {};
    std::string outer = loop_variable(block);
    if (outer.empty()) return {};
    const Stmt* inner = &block.children[1];
    if (inner->kind == StmtKind::Compound && inner->children.size() == 1 && inner->pragmas.empty())
        inner = &inner->children[0];
    if (inner->kind == StmtKind::For) {
        std::string iv = loop_variable(*inner);
        if (!iv.empty()) return {reduction ? "1" : outer, iv};
    }
    return {outer};
}

ReductionFragments transform_reduction(const Symbol& var, const Reduction& r)
{
    if (var.rank() != 0)
        throw CompileError(Diagnostic{"", var.decl.line, var.decl.col,
                                      "reduction variable '" + r.var + "' must be a scalar"});
    ReductionFragments f;
    f.param.kind = CodeletParam::Kind::Reduced;
    f.param.name = r.var + "_reduced";
    f.param.arg = "&" + r.var;
    f.param.symbol = r.var;
    f.param.type = var.type;
    f.param.type.is_const = false;
    f.param.decl.name = f.param.name;
    f.param.decl.pointer = 1;
    f.param.io = "inout";
    f.param.size = "1";

    Declarator local;
    local.name = r.var;
    local.init = Expr::unary("*", Expr::ident(f.param.name));
    f.prologue = Stmt::decl(f.param.type, local);
    f.epilogue = Stmt::expr_stmt(Expr::assign(Expr::unary("*", Expr::ident(f.param.name)), Expr::ident(r.var)));
    return f;
}

std::vector<CodeletParam> infer_codelet_params(const SourceUnit& unit, const FunctionDef& fn, const Stmt& block,
                                               const OmpPragma& omp)
{
    auto syms = visible_symbols(unit, fn, block.id);
    std::vector<std::string> order;
    std::set<std::string> seen;
    FreeVarWalker walker([&](const std::string& n) {
        if (seen.insert(n).second) order.push_back(n);
    });
    walker.stmt(block);

    AccessScanner scan(unit);
    auto accesses = scan.stmt(block);
    std::set<std::string> privates(omp.privates.begin(), omp.privates.end());

    std::vector<CodeletParam> params;
    std::set<std::string> placed;
    std::function<void(const std::string&)> add = [&](const std::string& name) {
        if (placed.count(name)) return;
        auto it = syms.find(name);
        if (it == syms.end())
            throw CompileError(Diagnostic{unit.file, block.line, block.col, "unknown symbol '" + name + "' in block"});
        const Symbol& sym = it->second;
        if (omp.reduction && omp.reduction->var == name) {
            placed.insert(name);
            params.push_back(transform_reduction(sym, *omp.reduction).param);
            return;
        }
        CodeletParam p;
        p.name = name;
        p.arg = name;
        p.symbol = name;
        p.type = sym.type;
        p.type.is_const = false;
        p.decl.name = name;
        if (sym.rank() == 0) {
            if (sym.decl.reference)
                throw CompileError(Diagnostic{unit.file, block.line, block.col,
                                              "reference '" + name + "' cannot be passed to a codelet"});
            p.kind = CodeletParam::Kind::Scalar;
            bool written = std::any_of(accesses.begin(), accesses.end(), [&](const Access& a) {
                return a.symbol == name && a.kind == AccessKind::Write;
            });
            bool escapes = sym.storage == Storage::Global && fn.name != "main";
            if (written && !privates.count(name) && live_after(fn, block.id, name, escapes, scan))
                throw CompileError(Diagnostic{unit.file, block.line, block.col,
                                              "scalar '" + name +
                                                  "' is written in the kernel and read afterwards on the host; "
                                                  "declare it in a reduction clause"});
        } else {
            if (sym.decl.pointer > 0 || sym.decl.dims.empty())
                throw CompileError(Diagnostic{unit.file, block.line, block.col,
                                              "free variable '" + name + "' has unknown dimensions"});
            for (const auto& d : sym.decl.dims)
                if (!d)
                    throw CompileError(Diagnostic{unit.file, block.line, block.col,
                                                  "free variable '" + name + "' has unknown dimensions"});
            // dimension symbols go ahead of the array
            for (const auto& d : sym.decl.dims)
                for_each_expr(*d, [&](const Expr& e) {
                    if (e.is_ident()) add(e.text);
                });
            p.kind = CodeletParam::Kind::Array;
            if (sym.decl.dims.size() == 1) {
                p.decl.pointer = 1;
                p.size = no_spaces(print_expr(*sym.decl.dims[0]));
            } else {
                p.decl.dims = sym.decl.dims;
            }
            p.io = infer_io_direction(name, accesses);
        }
        placed.insert(name);
        params.push_back(std::move(p));
    };
    for (const auto& n : order) add(n);
    if (omp.reduction && !placed.count(omp.reduction->var)) {
        auto it = syms.find(omp.reduction->var);
        if (it == syms.end())
            throw CompileError(Diagnostic{unit.file, block.line, block.col,
                                          "unknown reduction variable '" + omp.reduction->var + "'"});
        params.push_back(transform_reduction(it->second, *omp.reduction).param);
    }
    return params;
}

Outlined outline_block(const SourceUnit& unit, const OmpBlock& block, const std::string& label,
                       const std::vector<CodeletParam>* params)
{
    Outlined out;
    out.unit = unit;
    FunctionDef* fn = out.unit.find_function(block.function);
    if (!fn || !fn->body) throw CompileError(Diagnostic{unit.file, block.line, 0, "block outside a function"});
    Stmt* target = find_stmt(*fn->body, block.stmt_id);
    if (!target || target->kind != StmtKind::For)
        throw CompileError(Diagnostic{unit.file, block.line, 0, "OpenMP block is not a for loop"});

    CodeletDef& c = out.codelet;
    c.label = label;
    c.function = block.function;
    c.block = block.stmt_id;
    c.params = params ? *params : infer_codelet_params(out.unit, *fn, *target, block.omp);
    c.reduce = block.omp.reduction;
    c.gridify = gridify_spec(*target, c.reduce.has_value());

    Stmt loop = *target;
    loop.pragmas.clear();
    if (!c.gridify.empty()) {
        HmppDirective g;
        g.kind = HmppKind::Gridify;
        g.gridify = c.gridify;
        g.reduce = c.reduce;
        loop.pragmas.push_back(Pragma{PragmaFamily::Hmppcg, render_directive_text(g), 0, 0});
    }
    std::vector<Stmt> body;
    std::optional<Stmt> epilogue;
    if (c.reduce) {
        auto syms = visible_symbols(out.unit, *fn, block.stmt_id);
        auto frag = transform_reduction(syms.at(c.reduce->var), *c.reduce);
        body.push_back(frag.prologue);
        epilogue = frag.epilogue;
    }
    body.push_back(std::move(loop));
    if (epilogue) body.push_back(*epilogue);
    c.body = Stmt::compound(std::move(body));

    std::vector<Expr> args;
    for (const auto& p : c.params)
        args.push_back(p.kind == CodeletParam::Kind::Reduced ? Expr::unary("&", Expr::ident(p.symbol))
                                                             : Expr::ident(p.arg));
    out.callsite = Stmt::expr_stmt(Expr::call(label, std::move(args)));
    out.callsite.id = target->id;
    out.callsite.line = target->line;
    *target = out.callsite;

    // codelet definition goes right before the function using it
    TopItem item;
    item.kind = TopItem::Kind::Function;
    item.fn = c.to_function();
    auto pos = std::find_if(out.unit.items.begin(), out.unit.items.end(), [&](const TopItem& t) {
        return t.kind == TopItem::Kind::Function && t.fn.name == block.function && t.fn.body;
    });
    out.unit.items.insert(pos, std::move(item));
    return out;
}

bool is_device_intrinsic(const std::string& name)
{
    static const std::set<std::string> k = {"sin",  "cos",  "tan",   "asin", "acos", "atan", "atan2", "sinh",
                                            "cosh", "tanh", "exp",   "exp2", "log",  "log2", "log10", "sqrt",
                                            "cbrt", "pow",  "fabs",  "abs",  "floor", "ceil", "fmod", "fmin",
                                            "fmax", "round", "trunc", "sinf", "cosf", "expf", "sqrtf", "fabsf",
                                            "powf", "logf"};
    return k.count(name) > 0;
}

std::vector<Diagnostic> check_global_scope(const CodeletDef& codelet, const SourceUnit& unit)
{
    std::vector<Diagnostic> out;
    std::set<std::string> reported;
    FreeVarWalker walker([&](const std::string& n) {
        if (codelet.param_for(n) || reported.count(n)) return;
        for (const auto& p : codelet.params)
            if (p.name == n) return;
        reported.insert(n);
        out.push_back(Diagnostic{unit.file, 0, 0,
                                 "codelet '" + codelet.label + "' uses '" + n + "', which is not a parameter or local"});
    });
    walker.stmt(codelet.body);
    for_each_stmt(codelet.body, [&](const Stmt& s) {
        for_each_own_expr(s, [&](const Expr& root) {
            for_each_expr(root, [&](const Expr& e) {
                if (e.kind != ExprKind::Call || is_device_intrinsic(e.text) || reported.count(e.text + "()")) return;
                reported.insert(e.text + "()");
                out.push_back(Diagnostic{unit.file, e.line, e.col,
                                         "codelet '" + codelet.label + "' makes an un-inlinable call to '" + e.text +
                                             "'"});
            });
        });
    });
    return out;
}

} // namespace omp2hmpp
