#include "omp2hmpp/context.hpp"
#include "omp2hmpp/diagnostic.hpp"

#include <algorithm>
#include <sstream>

namespace omp2hmpp {

// ---------------------------------------------------------------- scanner

namespace {

const Expr& strip_parens(const Expr& e)
{
    const Expr* p = &e;
    while (p->kind == ExprKind::Paren) p = &p->kids[0];
    return *p;
}

// Base identifier of `x`, `x[i]`, `x[i][j]`, `(x)`; null otherwise.
const Expr* lvalue_root(const Expr& e)
{
    const Expr* p = &strip_parens(e);
    while (p->kind == ExprKind::Index) p = &strip_parens(p->kids[0]);
    return p->is_ident() ? p : nullptr;
}

std::set<std::string> locals_of(const FunctionDef& fn)
{
    std::set<std::string> out;
    for (const auto& p : fn.params) out.insert(p.decl.name);
    if (fn.body)
        for_each_stmt(*fn.body, [&](const Stmt& s) {
            for (const auto& d : s.decls) out.insert(d.name);
        });
    return out;
}

} // namespace

AccessScanner::AccessScanner(const SourceUnit& unit) : unit_(unit)
{
    // Summaries bottom-up by fixpoint; recursion just converges conservatively.
    std::set<std::string> globals;
    for (const auto& it : unit.items)
        if (it.kind == TopItem::Kind::Global)
            for (const auto& d : it.global.decls) globals.insert(d.name);

    std::vector<const FunctionDef*> fns;
    for (const auto& it : unit.items)
        if (it.kind == TopItem::Kind::Function && it.fn.body) fns.push_back(&it.fn);
    for (const auto* f : fns) {
        Summary s;
        s.param_read.assign(f->params.size(), false);
        s.param_written.assign(f->params.size(), false);
        summaries_[f->name] = s;
    }
    for (int round = 0; round < 8; ++round) {
        bool changed = false;
        for (const auto* f : fns) {
            auto acc = stmt(*f->body);
            auto locals = locals_of(*f);
            Summary s;
            s.param_read.assign(f->params.size(), false);
            s.param_written.assign(f->params.size(), false);
            for (const auto& a : acc) {
                bool is_param = false;
                for (std::size_t i = 0; i < f->params.size(); ++i) {
                    if (f->params[i].decl.name != a.symbol) continue;
                    is_param = true;
                    (a.kind == AccessKind::Read ? s.param_read : s.param_written)[i] = true;
                }
                if (!is_param && !locals.count(a.symbol) && globals.count(a.symbol))
                    (a.kind == AccessKind::Read ? s.global_reads : s.global_writes).insert(a.symbol);
            }
            auto& old = summaries_[f->name];
            if (old.param_read != s.param_read || old.param_written != s.param_written ||
                old.global_reads != s.global_reads || old.global_writes != s.global_writes) {
                old = s;
                changed = true;
            }
        }
        if (!changed) break;
    }
}

const AccessScanner::Summary* AccessScanner::summary(const std::string& fn) const
{
    auto it = summaries_.find(fn);
    return it == summaries_.end() ? nullptr : &it->second;
}

std::vector<Access> AccessScanner::expr(const Expr& e) const
{
    std::vector<Access> out;
    expr_into(e, out);
    return out;
}

std::vector<Access> AccessScanner::stmt(const Stmt& s) const
{
    std::vector<Access> out;
    stmt_into(s, out);
    return out;
}

void AccessScanner::lvalue_into(const Expr& e, bool read_too, std::vector<Access>& out) const
{
    const Expr& x = strip_parens(e);
    if (x.is_ident()) {
        if (read_too) out.push_back({x.text, AccessKind::Read});
        out.push_back({x.text, AccessKind::Write});
        return;
    }
    if (x.kind == ExprKind::Index) {
        // indices first, then the element
        const Expr* p = &x;
        std::vector<const Expr*> idx;
        while (p->kind == ExprKind::Index) {
            idx.push_back(&p->kids[1]);
            p = &strip_parens(p->kids[0]);
        }
        for (auto it = idx.rbegin(); it != idx.rend(); ++it) expr_into(**it, out);
        if (p->is_ident()) {
            if (read_too) out.push_back({p->text, AccessKind::Read});
            out.push_back({p->text, AccessKind::Write});
        } else {
            expr_into(*p, out);
        }
        return;
    }
    if (x.kind == ExprKind::Unary && x.text == "*") {
        const Expr* root = lvalue_root(x.kids[0]);
        if (root) {
            if (read_too) out.push_back({root->text, AccessKind::Read});
            out.push_back({root->text, AccessKind::Write});
        } else {
            expr_into(x.kids[0], out);
        }
        return;
    }
    expr_into(x, out);
}

void AccessScanner::expr_into(const Expr& e, std::vector<Access>& out) const
{
    switch (e.kind) {
    case ExprKind::Ident: out.push_back({e.text, AccessKind::Read}); return;
    case ExprKind::Assign:
        if (e.text == "=") {
            // indices and right-hand side, then the store
            std::vector<Access> lhs;
            lvalue_into(e.kids[0], false, lhs);
            Access store = lhs.back();
            lhs.pop_back();
            out.insert(out.end(), lhs.begin(), lhs.end());
            expr_into(e.kids[1], out);
            out.push_back(store);
        } else {
            std::vector<Access> lhs;
            lvalue_into(e.kids[0], true, lhs);
            Access store = lhs.back();
            lhs.pop_back();
            out.insert(out.end(), lhs.begin(), lhs.end());
            expr_into(e.kids[1], out);
            out.push_back(store);
        }
        return;
    case ExprKind::Postfix: lvalue_into(e.kids[0], true, out); return;
    case ExprKind::Unary:
        if (e.text == "++" || e.text == "--" || e.text == "&") {
            lvalue_into(e.kids[0], true, out);
            return;
        }
        expr_into(e.kids[0], out);
        return;
    case ExprKind::Call: {
        const Summary* s = summary(e.text);
        for (std::size_t i = 0; i < e.kids.size(); ++i) {
            const Expr& a = strip_parens(e.kids[i]);
            const Expr* root = a.is_ident() ? &a : nullptr;
            bool addr = a.kind == ExprKind::Unary && a.text == "&";
            if (addr) root = lvalue_root(a.kids[0]);
            if (root && s && i < s->param_read.size()) {
                if (s->param_read[i] || !s->param_written[i]) out.push_back({root->text, AccessKind::Read});
                if (s->param_written[i]) out.push_back({root->text, AccessKind::Write});
                continue;
            }
            if (root && addr) {
                out.push_back({root->text, AccessKind::Read});
                out.push_back({root->text, AccessKind::Write});
                continue;
            }
            expr_into(a, out);
        }
        if (s) {
            for (const auto& g : s->global_reads) out.push_back({g, AccessKind::Read});
            for (const auto& g : s->global_writes) out.push_back({g, AccessKind::Write});
        }
        return;
    }
    default:
        for (const auto& k : e.kids) expr_into(k, out);
        return;
    }
}

void AccessScanner::stmt_into(const Stmt& s, std::vector<Access>& out) const
{
    switch (s.kind) {
    case StmtKind::Decl:
        for (const auto& d : s.decls) {
            for (const auto& dim : d.dims)
                if (dim) expr_into(*dim, out);
            if (d.init) expr_into(*d.init, out);
            out.push_back({d.name, AccessKind::Write});
        }
        return;
    case StmtKind::For:
        stmt_into(s.children[0], out);
        if (s.expr) expr_into(*s.expr, out);
        stmt_into(s.children[1], out);
        if (s.step) expr_into(*s.step, out);
        return;
    case StmtKind::While:
        if (s.expr) expr_into(*s.expr, out);
        stmt_into(s.children[0], out);
        return;
    case StmtKind::If:
        if (s.expr) expr_into(*s.expr, out);
        for (const auto& c : s.children) stmt_into(c, out);
        return;
    case StmtKind::Compound:
        for (const auto& c : s.children) stmt_into(c, out);
        return;
    default:
        if (s.expr) expr_into(*s.expr, out);
        return;
    }
}

std::set<std::string> AccessScanner::unanalyzable(const Stmt& s) const
{
    std::set<std::string> out;
    // `ok` is true when the identifier sits in a position name analysis follows
    std::function<void(const Expr&, bool)> walk = [&](const Expr& e, bool ok) {
        switch (e.kind) {
        case ExprKind::Ident:
            if (!ok) out.insert(e.text);
            return;
        case ExprKind::Index:
            walk(e.kids[0], true);
            walk(e.kids[1], false);
            return;
        case ExprKind::Paren: walk(e.kids[0], ok); return;
        case ExprKind::Call:
            for (const auto& k : e.kids) {
                const Expr& a = strip_parens(k);
                if (a.kind == ExprKind::Unary && a.text == "&" && lvalue_root(a.kids[0]))
                    walk(a.kids[0], true);
                else
                    walk(a, true);
            }
            return;
        case ExprKind::Unary:
            if (e.text == "&") {
                const Expr* r = lvalue_root(e.kids[0]);
                if (r) out.insert(r->text);
                walk(e.kids[0], true);
                return;
            }
            walk(e.kids[0], false);
            return;
        default:
            for (const auto& k : e.kids) walk(k, false);
        }
    };
    for_each_stmt(s, [&](const Stmt& st) {
        for (const auto& d : st.decls) {
            for (const auto& dim : d.dims)
                if (dim) walk(*dim, true);
            if (d.init) walk(*d.init, false);
        }
        if (st.expr) walk(*st.expr, true);
        if (st.step) walk(*st.step, true);
    });
    return out;
}

// ---------------------------------------------------------------- table

namespace {

void table_walk(const Stmt& s, const AccessScanner& scan, const std::set<int>& kernels, std::vector<int>& loops,
                ContextTable& t)
{
    auto record = [&](const std::vector<Access>& as, int site, Host host) {
        for (const auto& a : as)
            t.events[a.symbol].push_back(
                AccessEvent{a.symbol, a.kind, site, host, host == Host::Gpu ? s.id : -1, loops});
    };
    if (kernels.count(s.id)) {
        record(scan.stmt(s), s.id, Host::Gpu);
        return;
    }
    switch (s.kind) {
    case StmtKind::Compound:
        for (const auto& c : s.children) table_walk(c, scan, kernels, loops, t);
        return;
    case StmtKind::For:
    case StmtKind::While: {
        std::vector<Access> head;
        if (s.kind == StmtKind::For) {
            auto init = scan.stmt(s.children[0]);
            head.insert(head.end(), init.begin(), init.end());
        }
        if (s.expr) {
            auto c = scan.expr(*s.expr);
            head.insert(head.end(), c.begin(), c.end());
        }
        record(head, s.id, Host::Cpu);
        loops.push_back(s.id);
        table_walk(s.body(), scan, kernels, loops, t);
        if (s.step) record(scan.expr(*s.step), s.id, Host::Cpu);
        loops.pop_back();
        return;
    }
    case StmtKind::If:
        if (s.expr) record(scan.expr(*s.expr), s.id, Host::Cpu);
        for (const auto& c : s.children) table_walk(c, scan, kernels, loops, t);
        return;
    case StmtKind::Decl: {
        // a declaration without initializer defines no value worth logging
        auto as = scan.stmt(s);
        std::erase_if(as, [&](const Access& a) {
            if (a.kind != AccessKind::Write) return false;
            for (const auto& d : s.decls)
                if (d.name == a.symbol) return !d.init;
            return false;
        });
        record(as, s.id, Host::Cpu);
        return;
    }
    default: record(scan.stmt(s), s.id, Host::Cpu); return;
    }
}

} // namespace

ContextTable build_context_table(const SourceUnit& unit, const FunctionDef& fn, const std::set<int>& kernels)
{
    ContextTable t;
    t.kernels = kernels;
    if (!fn.body) return t;
    AccessScanner scan(unit);
    std::vector<int> loops;
    table_walk(*fn.body, scan, kernels, loops, t);
    for (auto& [sym, evs] : t.events)
        std::stable_sort(evs.begin(), evs.end(), [](const AccessEvent& a, const AccessEvent& b) {
            return a.site < b.site;
        });
    return t;
}

std::string ContextTable::dump() const
{
    std::ostringstream os;
    for (const auto& [sym, evs] : events)
        for (const auto& e : evs) {
            os << sym << ' ' << (e.kind == AccessKind::Read ? 'R' : 'W') << " @" << e.site << ' '
               << (e.host == Host::Cpu ? std::string("cpu") : "gpu" + std::to_string(e.kernel));
            if (!e.loop_path.empty()) {
                os << " loops=";
                for (std::size_t i = 0; i < e.loop_path.size(); ++i) os << (i ? "," : "") << e.loop_path[i];
            }
            os << '\n';
        }
    return os.str();
}

std::string infer_io_direction(const std::string& symbol, const std::vector<Access>& kernel_accesses)
{
    bool r = false, w = false;
    for (const auto& a : kernel_accesses) {
        if (a.symbol != symbol) continue;
        (a.kind == AccessKind::Read ? r : w) = true;
    }
    if (!w) return "in";
    if (!r) return "out";
    return "inout";
}

// ---------------------------------------------------------------- placement

namespace {

using Path = std::vector<std::pair<const Stmt*, std::size_t>>;

bool path_to(const Stmt& s, int target, Path& path)
{
    if (s.id == target) return true;
    for (std::size_t i = 0; i < s.children.size(); ++i) {
        path.emplace_back(&s, i);
        if (path_to(s.children[i], target, path)) return true;
        path.pop_back();
    }
    return false;
}

// The loop whose body is the compound at `level` of the path, if any.
const Stmt* enclosing_loop_of_body(const Path& path, std::size_t level)
{
    if (level == 0) return nullptr;
    const auto& [owner, idx] = path[level - 1];
    if (owner->is_loop() && &owner->body() == &owner->children[idx]) return owner;
    return nullptr;
}

Gap end_gap(const Stmt& body)
{
    int n = static_cast<int>(body.children.size());
    if (n > 0 && body.children.back().kind == StmtKind::Return) return {body.id, n - 1};
    return {body.id, n};
}

} // namespace

Gap last_cpu_write_site(const FunctionDef& fn, int kernel, const std::string& symbol,
                        const std::function<bool(const Stmt&)>& host_writer)
{
    (void)symbol;
    Path path;
    if (!fn.body || !path_to(*fn.body, kernel, path)) return {fn.body ? fn.body->id : -1, 0};
    for (std::size_t level = path.size(); level-- > 0;) {
        const Stmt& p = *path[level].first;
        std::size_t idx = path[level].second;
        if (p.kind != StmtKind::Compound) continue;
        for (std::size_t t = idx; t-- > 0;)
            if (host_writer(p.children[t])) return {p.id, static_cast<int>(t + 1)};
        if (const Stmt* loop = enclosing_loop_of_body(path, level); loop && host_writer(*loop))
            return {p.id, static_cast<int>(idx)};
    }
    return {fn.body->id, 0};
}

std::optional<Gap> first_cpu_read_site(const FunctionDef& fn, int kernel,
                                       const std::function<bool(const Stmt&)>& host_access,
                                       const std::function<bool(const Gap&)>& gap_access, bool escapes)
{
    Path path;
    if (!fn.body || !path_to(*fn.body, kernel, path)) return std::nullopt;
    for (std::size_t level = path.size(); level-- > 0;) {
        const Stmt& p = *path[level].first;
        std::size_t idx = path[level].second;
        if (p.kind != StmtKind::Compound) continue;
        int n = static_cast<int>(p.children.size());
        for (int t = static_cast<int>(idx) + 1; t <= n; ++t) {
            Gap g{p.id, t};
            if (gap_access(g)) return g;
            if (t == n) break;
            const Stmt& st = p.children[static_cast<std::size_t>(t)];
            if (st.kind == StmtKind::Return) {
                if (escapes) return g;
                return std::nullopt;
            }
            if (st.kind == StmtKind::Break || st.kind == StmtKind::Continue || host_access(st)) return g;
        }
        if (const Stmt* loop = enclosing_loop_of_body(path, level); loop && host_access(*loop))
            return Gap{p.id, n};
    }
    if (escapes) return end_gap(*fn.body);
    return std::nullopt;
}

namespace {

struct Facts {
    std::set<std::string> reads, writes;
    std::vector<int> kernels;
    bool exits = false; // return/break/continue inside
};

class PlanBuilder {
  public:
    PlanBuilder(const SourceUnit& unit, const FunctionDef& fn, const std::vector<KernelInfo>& ks)
        : unit_(unit), fn_(fn), scan_(unit)
    {
        for (const auto& k : ks) kernels_[k.block] = &k;
        order_ = ks;
        std::sort(order_.begin(), order_.end(), [](const KernelInfo& a, const KernelInfo& b) {
            return a.block < b.block;
        });
        facts(*fn.body);
        for (const auto& it : unit.items)
            if (it.kind == TopItem::Kind::Global)
                for (const auto& d : it.global.decls) globals_.insert(d.name);
        for (const auto& p : fn.params) params_.insert(p.decl.name);
    }

    TransferPlan build()
    {
        TransferPlan plan;
        const Stmt& body = *fn_.body;

        // symbols whose accesses name analysis cannot see fully
        std::set<std::string> arrays;
        for (const auto& k : order_) {
            arrays.insert(k.inputs.begin(), k.inputs.end());
            for (const auto& o : k.outputs)
                if (!k.reduced_outputs().count(o)) arrays.insert(o);
        }
        for (const auto& n : scan_.unanalyzable(body))
            if (arrays.count(n)) plan.fallback.insert(n);

        // uploads each callsite still performs
        for (const auto& k : order_) {
            std::set<std::string> up;
            for (const auto& s : k.inputs)
                if (!(k.flags.advancedload && k.flags.noupdate && !plan.fallback.count(s))) up.insert(s);
            for (const auto& s : k.reduced_outputs()) up.insert(s);
            uploads_[k.block] = up;
            if (k.flags.advancedload && k.flags.noupdate)
                for (const auto& s : k.inputs)
                    if (!plan.fallback.count(s)) plan.noupdate[k.block].insert(s);
        }

        // group and mapbyname at the top
        std::map<std::string, std::vector<std::string>> mapped;
        std::vector<std::string> groups;
        for (const auto& k : order_) {
            if (k.group.empty()) continue;
            if (std::find(groups.begin(), groups.end(), k.group) == groups.end()) groups.push_back(k.group);
        }
        for (const auto& g : groups) {
            std::vector<std::string> syms;
            std::map<std::string, int> users;
            for (const auto& k : order_) {
                if (k.group != g) continue;
                for (const auto& s : k.order)
                    if (k.is_array(s) && users[s]++ == 0) syms.push_back(s);
            }
            std::vector<std::string> shared;
            for (const auto& s : syms)
                if (users[s] >= 2) shared.push_back(s);
            add(plan, DirectiveKind::Group, {body.id, 0}, g, "", {}, -1);
            if (!shared.empty()) add(plan, DirectiveKind::Mapbyname, {body.id, 0}, g, "", shared, -1);
        }

        // advancedload: after the last host write
        for (const auto& k : order_) {
            if (!k.flags.advancedload) continue;
            for (const auto& s : k.inputs) {
                if (plan.fallback.count(s)) continue;
                std::string ctx = context(k);
                Gap g = last_cpu_write_site(fn_, k.block, s, [&](const Stmt& st) { return writes(st, s, ctx); });
                loads_[s].insert(g);
                add(plan, DirectiveKind::Advancedload, g, ctx, k.label, {s}, k.block);
            }
        }

        // delegatedstore: before the first host access
        for (const auto& k : order_) {
            if (!k.flags.delegatedstore) continue;
            for (const auto& s : k.outputs) {
                if (plan.fallback.count(s)) continue;
                std::string ctx = context(k);
                bool escapes = fn_.name != "main" &&
                               (globals_.count(s) || (params_.count(s) && !k.reduced_outputs().count(s)));
                auto g = first_cpu_read_site(
                    fn_, k.block, [&](const Stmt& st) { return accesses(st, s, ctx); },
                    [&](const Gap& gp) { return loads_[s].count(gp) > 0; }, escapes);
                if (!g) continue;
                add(plan, DirectiveKind::Delegatedstore, *g, ctx, k.label, {s}, k.block);
            }
        }

        // synchronize: before anything touching the kernel's data
        for (const auto& k : order_) {
            if (!k.flags.asynchronous) continue;
            plan.async.insert(k.block);
            Path path;
            path_to(body, k.block, path);
            const Stmt& list = *path.back().first;
            std::size_t idx = path.back().second;
            Gap at{list.id, static_cast<int>(list.children.size())};
            for (std::size_t t = idx + 1; t <= list.children.size(); ++t) {
                Gap g{list.id, static_cast<int>(t)};
                bool busy = std::any_of(plan.directives.begin(), plan.directives.end(), [&](const PlacedDirective& d) {
                    if (d.gap != g) return false;
                    if (d.context == context(k)) return true;
                    for (const auto& s : d.symbols)
                        if (k.uses.count(s)) return true;
                    return false;
                });
                if (busy) {
                    at = g;
                    break;
                }
                if (t == list.children.size()) break;
                const Facts& f = facts_.at(list.children[t].id);
                bool touch = f.exits || !f.kernels.empty() || list.children[t].kind == StmtKind::Return;
                for (const auto& s : k.uses) touch = touch || f.reads.count(s) || f.writes.count(s);
                if (touch) {
                    at = g;
                    break;
                }
            }
            add(plan, DirectiveKind::Synchronize, at, context(k), k.label, {}, k.block);
        }

        // release: after the last top-level statement using the context's arrays
        std::vector<std::string> contexts;
        for (const auto& k : order_)
            if (k.flags.release && std::find(contexts.begin(), contexts.end(), context(k)) == contexts.end())
                contexts.push_back(context(k));
        for (const auto& ctx : contexts) {
            std::set<std::string> syms;
            std::set<int> ks;
            std::string label;
            for (const auto& k : order_) {
                if (context(k) != ctx) continue;
                ks.insert(k.block);
                for (const auto& s : k.uses)
                    if (k.is_array(s)) syms.insert(s);
                if (label.empty()) label = k.label;
            }
            int last = -1;
            for (std::size_t t = 0; t < body.children.size(); ++t) {
                const Facts& f = facts_.at(body.children[t].id);
                bool uses = std::any_of(f.kernels.begin(), f.kernels.end(), [&](int id) { return ks.count(id) > 0; });
                for (const auto& s : syms) uses = uses || f.reads.count(s) || f.writes.count(s);
                if (uses) last = static_cast<int>(t);
            }
            Gap g{body.id, last + 1};
            if (last >= 0 && body.children[static_cast<std::size_t>(last)].kind == StmtKind::Return) g.index = last;
            bool grouped = ctx != label;
            add(plan, DirectiveKind::Release, g, ctx, grouped ? "" : label, {}, -1);
        }

        std::stable_sort(plan.directives.begin(), plan.directives.end(),
                         [](const PlacedDirective& a, const PlacedDirective& b) {
                             if (a.gap != b.gap) return a.gap < b.gap;
                             return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                         });
        return plan;
    }

  private:
    std::string context(const KernelInfo& k) const { return k.group.empty() ? k.label : k.group; }

    void add(TransferPlan& plan, DirectiveKind kind, Gap g, const std::string& ctx, const std::string& label,
             const std::vector<std::string>& syms, int kernel)
    {
        for (auto& d : plan.directives) {
            if (d.kind != kind || d.gap != g || d.context != ctx) continue;
            if (kind == DirectiveKind::Synchronize && d.label != label) continue;
            bool dup = true;
            for (const auto& s : syms)
                if (std::find(d.symbols.begin(), d.symbols.end(), s) == d.symbols.end()) dup = false;
            if (dup && (kind == DirectiveKind::Advancedload || kind == DirectiveKind::Delegatedstore ||
                        syms.empty()))
                return;
            // one load/store directive per label and gap, symbols coalesced
            if ((kind == DirectiveKind::Advancedload || kind == DirectiveKind::Delegatedstore) && d.label == label) {
                for (const auto& s : syms)
                    if (std::find(d.symbols.begin(), d.symbols.end(), s) == d.symbols.end()) d.symbols.push_back(s);
                return;
            }
        }
        plan.directives.push_back(PlacedDirective{kind, g, ctx, label, syms, kernel});
    }

    const Facts& facts(const Stmt& s)
    {
        Facts f;
        if (kernels_.count(s.id)) {
            f.kernels.push_back(s.id);
        } else {
            auto own = [&](const Expr& e) {
                for (const auto& a : scan_.expr(e)) (a.kind == AccessKind::Read ? f.reads : f.writes).insert(a.symbol);
            };
            if (s.kind == StmtKind::Decl || s.kind == StmtKind::Expr || s.kind == StmtKind::Return) {
                for (const auto& a : scan_.stmt(s)) (a.kind == AccessKind::Read ? f.reads : f.writes).insert(a.symbol);
            } else {
                if (s.expr) own(*s.expr);
                if (s.step) own(*s.step);
            }
            if (s.kind == StmtKind::Return || s.kind == StmtKind::Break || s.kind == StmtKind::Continue) f.exits = true;
            for (const auto& c : s.children) {
                const Facts& cf = facts(c);
                f.reads.insert(cf.reads.begin(), cf.reads.end());
                f.writes.insert(cf.writes.begin(), cf.writes.end());
                f.kernels.insert(f.kernels.end(), cf.kernels.begin(), cf.kernels.end());
                f.exits = f.exits || cf.exits;
            }
        }
        return facts_[s.id] = f;
    }

    // Does `st` change the host-visible value of `s` as seen from context `ctx`?
    bool writes(const Stmt& st, const std::string& s, const std::string& ctx) const
    {
        const Facts& f = facts_.at(st.id);
        if (f.writes.count(s)) return true;
        for (int id : f.kernels) {
            const KernelInfo& k = *kernels_.at(id);
            if (context(k) == ctx) continue;
            if (std::find(k.outputs.begin(), k.outputs.end(), s) != k.outputs.end()) return true;
        }
        return false;
    }

    // Does `st` need the host copy of `s` current (context `ctx` holds it)?
    bool accesses(const Stmt& st, const std::string& s, const std::string& ctx) const
    {
        const Facts& f = facts_.at(st.id);
        if (f.reads.count(s) || f.writes.count(s)) return true;
        for (int id : f.kernels) {
            const KernelInfo& k = *kernels_.at(id);
            if (context(k) != ctx) {
                if (k.uses.count(s)) return true;
            } else if (uploads_.at(id).count(s)) {
                return true;
            }
        }
        return false;
    }

    const SourceUnit& unit_;
    const FunctionDef& fn_;
    AccessScanner scan_;
    std::map<int, const KernelInfo*> kernels_;
    std::vector<KernelInfo> order_;
    std::map<int, Facts> facts_;
    std::map<int, std::set<std::string>> uploads_;
    std::map<std::string, std::set<Gap>> loads_;
    std::set<std::string> globals_, params_;
};

const char* kind_name(DirectiveKind k)
{
    switch (k) {
    case DirectiveKind::Group: return "group";
    case DirectiveKind::Mapbyname: return "mapbyname";
    case DirectiveKind::Synchronize: return "synchronize";
    case DirectiveKind::Delegatedstore: return "delegatedstore";
    case DirectiveKind::Release: return "release";
    case DirectiveKind::Advancedload: return "advancedload";
    }
    return "?";
}

} // namespace

TransferPlan build_transfer_plan(const SourceUnit& unit, const FunctionDef& fn, const std::vector<KernelInfo>& kernels)
{
    if (!fn.body) return {};
    return PlanBuilder(unit, fn, kernels).build();
}

std::string TransferPlan::dump() const
{
    std::ostringstream os;
    for (const auto& d : directives) {
        os << kind_name(d.kind) << " list=" << d.gap.list << " at=" << d.gap.index << " ctx=" << d.context;
        if (!d.label.empty()) os << " label=" << d.label;
        for (const auto& s : d.symbols) os << ' ' << s;
        os << '\n';
    }
    for (const auto& [k, syms] : noupdate) {
        os << "noupdate kernel=" << k;
        for (const auto& s : syms) os << ' ' << s;
        os << '\n';
    }
    for (int k : async) os << "async kernel=" << k << '\n';
    for (const auto& s : fallback) os << "fallback " << s << '\n';
    return os.str();
}

} // namespace omp2hmpp
