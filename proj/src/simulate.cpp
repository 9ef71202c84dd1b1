#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/directives.hpp"
#include "omp2hmpp/explore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

namespace omp2hmpp {

namespace {

using Env = std::map<std::string, long long>;

struct Symbol {
    std::string id;
    double bytes = 0;
    bool array = false;
};

struct Frame {
    const FunctionDef* fn = nullptr;
    Env env;
    std::map<std::string, Symbol> locals;
};

struct Codelet {
    const FunctionDef* fn = nullptr;
    HmppDirective dir;
    std::string scope; // group name, or the label when ungrouped
    std::set<std::string> reads, writes;
};

struct PendingAsync {
    double end = 0;
    std::vector<Symbol> downloads;
};

enum class Flow { Normal, Break, Continue, Return };

constexpr long long kMaxReplayIterations = 10'000'000;
constexpr int kMaxDepth = 64;

bool is_incdec(const Expr& e)
{
    return (e.kind == ExprKind::Postfix || e.kind == ExprKind::Unary) && (e.text == "++" || e.text == "--");
}

// Variable an lvalue ultimately names: a[i][j] -> a, *p -> p.
const Expr* lvalue_base(const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Ident: return &e;
    case ExprKind::Index:
    case ExprKind::Paren: return lvalue_base(e.kids[0]);
    case ExprKind::Unary: return e.text == "*" ? lvalue_base(e.kids[0]) : nullptr;
    default: return nullptr;
    }
}

// Reads and writes of named variables in one expression.
void collect_access(const Expr& e, std::set<std::string>& reads, std::set<std::string>& writes)
{
    auto write_target = [&](const Expr& lv, bool also_read) {
        if (const Expr* b = lvalue_base(lv)) {
            writes.insert(b->text);
            if (also_read) reads.insert(b->text);
        }
        // subscripts of the target are reads
        if (lv.kind == ExprKind::Index) {
            for_each_expr(lv, [&](const Expr& x) {
                if (&x != lvalue_base(lv) && x.kind == ExprKind::Ident) reads.insert(x.text);
            });
        }
    };
    switch (e.kind) {
    case ExprKind::Ident: reads.insert(e.text); return;
    case ExprKind::Assign:
        write_target(e.kids[0], e.text != "=");
        collect_access(e.kids[1], reads, writes);
        return;
    case ExprKind::Postfix:
    case ExprKind::Unary:
        if (is_incdec(e)) {
            write_target(e.kids[0], true);
            return;
        }
        break;
    default: break;
    }
    for (const auto& k : e.kids) collect_access(k, reads, writes);
}

double expr_ops(const Expr& e)
{
    double n = 0;
    for_each_expr(e, [&](const Expr& x) {
        switch (x.kind) {
        case ExprKind::Unary:
        case ExprKind::Postfix:
        case ExprKind::Binary:
        case ExprKind::Assign:
        case ExprKind::Ternary:
        case ExprKind::Call:
        case ExprKind::Index: n += 1; break;
        default: break;
        }
    });
    return n;
}

std::set<std::string> assigned_in(const Stmt& s)
{
    std::set<std::string> reads, writes;
    for_each_stmt(s, [&](const Stmt& t) {
        for_each_own_expr(t, [&](const Expr& e) { collect_access(e, reads, writes); });
        for (const auto& d : t.decls) writes.insert(d.name);
    });
    return writes;
}

std::optional<long long> arith(const std::string& op, long long a, long long b)
{
    if (op == "+") return a + b;
    if (op == "-") return a - b;
    if (op == "*") return a * b;
    if (op == "/") return b == 0 ? std::nullopt : std::optional<long long>(a / b);
    if (op == "%") return b == 0 ? std::nullopt : std::optional<long long>(a % b);
    if (op == "<") return a < b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    if (op == ">=") return a >= b;
    if (op == "==") return a == b;
    if (op == "!=") return a != b;
    if (op == "&&") return a && b;
    if (op == "||") return a || b;
    if (op == "<<") return a << b;
    if (op == ">>") return a >> b;
    if (op == "&") return a & b;
    if (op == "|") return a | b;
    if (op == "^") return a ^ b;
    return std::nullopt;
}

// Signed step a loop statement applies to `var`, if it is a plain one.
std::optional<long long> step_of(const Expr& e, const std::string& var, const std::function<std::optional<long long>(const Expr&)>& eval)
{
    if (is_incdec(e) && e.kids[0].is_ident() && e.kids[0].text == var) return e.text == "++" ? 1 : -1;
    if (e.kind == ExprKind::Assign && e.kids[0].is_ident() && e.kids[0].text == var) {
        if (e.text == "+=" || e.text == "-=") {
            auto c = eval(e.kids[1]);
            if (!c) return std::nullopt;
            return e.text == "+=" ? *c : -*c;
        }
        if (e.text == "=" && e.kids[1].kind == ExprKind::Binary && (e.kids[1].text == "+" || e.kids[1].text == "-") &&
            e.kids[1].kids[0].is_ident() && e.kids[1].kids[0].text == var) {
            auto c = eval(e.kids[1].kids[1]);
            if (!c) return std::nullopt;
            return e.kids[1].text == "+" ? *c : -*c;
        }
    }
    return std::nullopt;
}

// Iterations of `for/while (var = start; var OP bound; var += delta)`.
std::optional<long long> trip_count(long long start, const std::string& op, long long bound, long long delta)
{
    if (delta == 0) return std::nullopt;
    auto ceil_div = [](long long a, long long b) { return a <= 0 ? 0 : (a + b - 1) / b; };
    if (op == "<") return delta > 0 ? ceil_div(bound - start, delta) : (start < bound ? std::nullopt : std::optional(0LL));
    if (op == "<=") return delta > 0 ? ceil_div(bound - start + 1, delta) : (start <= bound ? std::nullopt : std::optional(0LL));
    if (op == ">") return delta < 0 ? ceil_div(start - bound, -delta) : (start > bound ? std::nullopt : std::optional(0LL));
    if (op == ">=") return delta < 0 ? ceil_div(start - bound + 1, -delta) : (start >= bound ? std::nullopt : std::optional(0LL));
    if (op == "!=") {
        if ((bound - start) % delta != 0 || (bound - start) / delta < 0) return std::nullopt;
        return (bound - start) / delta;
    }
    return std::nullopt;
}

std::string flip(const std::string& op)
{
    if (op == "<") return ">";
    if (op == ">") return "<";
    if (op == "<=") return ">=";
    if (op == ">=") return "<=";
    return op;
}

class Simulator {
  public:
    Simulator(const SourceUnit& unit, const CostModelParams& params) : unit_(unit), p_(params) {}

    SimResult run()
    {
        p_.validate();
        frames_.push_back(Frame{});
        for (const auto& item : unit_.items) {
            if (item.kind == TopItem::Kind::Global) {
                declare(item.global);
                continue;
            }
            for (const auto& pr : item.fn.pragmas) {
                if (pr.family != PragmaFamily::Hmpp) continue;
                auto d = parse_hmpp_directive(pr.text);
                if (d.kind == HmppKind::Codelet) add_codelet(item.fn, d);
            }
        }
        const FunctionDef* main = unit_.find_definition("main");
        if (!main || !main->body) throw std::runtime_error(unit_.file + ": no main function to simulate");
        frames_.push_back(Frame{main, {}, {}});
        exec(*main->body);
        while (!pending_.empty()) synchronize(pending_.begin()->first);

        r_.time_s = clock_;
        double idle = std::max(0.0, clock_ - cpu_busy_);
        r_.energy_J = p_.power_cpu_active * cpu_busy_ + p_.power_cpu_idle * idle + p_.power_gpu_active * gpu_busy_ +
                      p_.power_memory * clock_;
        return r_;
    }

  private:
    using Pending = std::map<std::string, PendingAsync>;

    // ---- symbols and values

    Frame& frame() { return frames_.back(); }

    const Symbol* resolve(const std::string& name) const
    {
        auto& top = frames_.back();
        if (auto it = top.locals.find(name); it != top.locals.end()) return &it->second;
        if (auto it = frames_.front().locals.find(name); it != frames_.front().locals.end()) return &it->second;
        return nullptr;
    }

    std::optional<long long> lookup(const std::string& name) const
    {
        auto& top = frames_.back().env;
        if (auto it = top.find(name); it != top.end()) return it->second;
        if (frames_.back().locals.count(name)) return std::nullopt; // shadowing local without a value
        auto& g = frames_.front().env;
        if (auto it = g.find(name); it != g.end()) return it->second;
        return std::nullopt;
    }

    Env& env_for(const std::string& name)
    {
        if (frames_.size() > 1 && !frames_.back().locals.count(name) && frames_.front().locals.count(name))
            return frames_.front().env;
        return frames_.back().env;
    }

    std::optional<long long> eval(const Expr& e) const
    {
        switch (e.kind) {
        case ExprKind::IntLit:
            try {
                return std::stoll(e.text, nullptr, 0);
            } catch (...) {
                return std::nullopt;
            }
        case ExprKind::CharLit: return e.text.size() >= 3 ? std::optional<long long>(e.text[1]) : std::nullopt;
        case ExprKind::Ident: return lookup(e.text);
        case ExprKind::Paren:
        case ExprKind::Cast: return eval(e.kids[0]);
        case ExprKind::Unary: {
            if (e.text == "++" || e.text == "--") {
                auto v = eval(e.kids[0]);
                if (!v) return v;
                return e.text == "++" ? *v + 1 : *v - 1;
            }
            auto v = eval(e.kids[0]);
            if (!v) return v;
            if (e.text == "-") return -*v;
            if (e.text == "+") return *v;
            if (e.text == "!") return !*v;
            if (e.text == "~") return ~*v;
            return std::nullopt;
        }
        case ExprKind::Postfix: return eval(e.kids[0]);
        case ExprKind::Binary: {
            auto a = eval(e.kids[0]);
            auto b = eval(e.kids[1]);
            if (!a || !b) return std::nullopt;
            return arith(e.text, *a, *b);
        }
        case ExprKind::Ternary: {
            auto c = eval(e.kids[0]);
            if (!c) return std::nullopt;
            return eval(e.kids[*c ? 1 : 2]);
        }
        default: return std::nullopt;
        }
    }

    // Side effects of an expression on known integer values.
    void apply(const Expr& e)
    {
        if (e.kind == ExprKind::Ternary) {
            apply(e.kids[0]);
            if (auto c = eval(e.kids[0])) {
                apply(e.kids[*c ? 1 : 2]);
            } else {
                forget(e.kids[1]);
                forget(e.kids[2]);
            }
            return;
        }
        if (e.kind == ExprKind::Binary && (e.text == "&&" || e.text == "||")) {
            apply(e.kids[0]);
            forget(e.kids[1]);
            return;
        }
        if (e.kind == ExprKind::Assign) {
            apply(e.kids[1]);
            if (e.kids[0].is_ident()) {
                const auto& name = e.kids[0].text;
                std::optional<long long> v = eval(e.kids[1]);
                if (e.text != "=" && v) {
                    auto old = lookup(name);
                    v = old ? arith(e.text.substr(0, e.text.size() - 1), *old, *v) : std::nullopt;
                }
                set_value(name, v);
            } else {
                for (const auto& k : e.kids[0].kids) apply(k);
            }
            return;
        }
        if (is_incdec(e)) {
            if (e.kids[0].is_ident()) {
                auto old = lookup(e.kids[0].text);
                set_value(e.kids[0].text, old ? std::optional(*old + (e.text == "++" ? 1 : -1)) : std::nullopt);
            }
            return;
        }
        if (e.kind == ExprKind::Call) {
            for (const auto& k : e.kids) apply(k);
            // a pointer handed to a call may be written through
            for (const auto& k : e.kids)
                if (k.kind == ExprKind::Unary && k.text == "&" && k.kids[0].is_ident()) set_value(k.kids[0].text, std::nullopt);
            return;
        }
        for (const auto& k : e.kids) apply(k);
    }

    void forget(const Expr& e)
    {
        std::set<std::string> reads, writes;
        collect_access(e, reads, writes);
        for (const auto& w : writes) set_value(w, std::nullopt);
    }

    void set_value(const std::string& name, std::optional<long long> v)
    {
        Env& env = env_for(name);
        if (v)
            env[name] = *v;
        else
            env.erase(name);
    }

    void declare(const Stmt& decl)
    {
        for (const auto& d : decl.decls) {
            Symbol s;
            s.id = frames_.size() == 1 ? d.name : frame().fn->name + "::" + d.name;
            double count = 1;
            for (const auto& dim : d.dims) {
                auto v = dim ? eval(*dim) : std::nullopt;
                count *= v ? static_cast<double>(*v) : 0.0;
            }
            s.array = !d.dims.empty();
            s.bytes = count * (d.pointer ? 8.0 : static_cast<double>(element_size(decl.type.base)));
            frame().locals[d.name] = s;
            host_fresh_.erase(s.id);
            if (d.init && d.dims.empty() && !d.pointer) {
                apply(*d.init);
                set_value(d.name, eval(*d.init));
            } else {
                if (d.init) apply(*d.init);
                set_value(d.name, std::nullopt);
            }
        }
    }

    // ---- residency bookkeeping

    bool host_fresh(const std::string& id) const
    {
        auto it = host_fresh_.find(id);
        return it == host_fresh_.end() || it->second;
    }

    bool dev_fresh(const std::string& scope, const std::string& id) const
    {
        auto it = dev_fresh_.find({scope, id});
        return it != dev_fresh_.end() && it->second;
    }

    void host_reads(const std::set<std::string>& names, int line)
    {
        for (const auto& n : names) {
            const Symbol* s = resolve(n);
            if (s && !host_fresh(s->id))
                throw SoundnessError(unit_.file + ":" + std::to_string(line) + ": host reads '" + n +
                                     "' while the newer copy is on the device");
        }
    }

    void host_writes(const std::set<std::string>& names)
    {
        for (const auto& n : names) {
            const Symbol* s = resolve(n);
            if (!s) continue;
            host_fresh_[s->id] = true;
            for (auto& [key, fresh] : dev_fresh_)
                if (key.second == s->id) fresh = false;
        }
    }

    void host_expr(const Expr& e, int line)
    {
        std::set<std::string> reads, writes;
        collect_access(e, reads, writes);
        if (!in_kernel_) {
            host_reads(reads, line);
            host_writes(writes);
        }
    }

    void cpu(double ops)
    {
        if (in_kernel_) {
            kernel_ops_ += ops;
            return;
        }
        double t = ops / p_.cpu_throughput;
        clock_ += t;
        cpu_busy_ += t;
        r_.cpu_s += t;
        r_.cpu_ops += ops;
    }

    void upload(const std::string& scope, const Symbol& s, int line, const std::string& what)
    {
        if (!host_fresh(s.id))
            throw SoundnessError(unit_.file + ":" + std::to_string(line) + ": " + what + " uploads '" + s.id +
                                 "' but the host copy is stale");
        clock_ = std::max(clock_, gpu_free_);
        double t = s.bytes / p_.h2d_bandwidth;
        clock_ += t;
        r_.load_s += t;
        r_.transfers.h2d_bytes += s.bytes;
        (s.array ? r_.transfers.h2d_arrays : r_.transfers.h2d_scalars)++;
        dev_fresh_[{scope, s.id}] = true;
    }

    void download(const std::string& scope, const Symbol& s, int line, const std::string& what)
    {
        if (!dev_fresh(scope, s.id))
            throw SoundnessError(unit_.file + ":" + std::to_string(line) + ": " + what + " stores '" + s.id +
                                 "' which has no device copy");
        clock_ = std::max(clock_, gpu_free_);
        double t = s.bytes / p_.d2h_bandwidth;
        clock_ += t;
        r_.store_s += t;
        r_.transfers.d2h_bytes += s.bytes;
        (s.array ? r_.transfers.d2h_arrays : r_.transfers.d2h_scalars)++;
        host_fresh_[s.id] = true;
    }

    // ---- codelets and directives

    void add_codelet(const FunctionDef& fn, const HmppDirective& d)
    {
        Codelet c;
        c.fn = &fn;
        c.dir = d;
        c.scope = d.group.empty() ? d.label : d.group;
        if (fn.body) {
            for_each_stmt(*fn.body, [&](const Stmt& s) {
                for_each_own_expr(s, [&](const Expr& e) { collect_access(e, c.reads, c.writes); });
            });
        }
        codelets_[d.label] = std::move(c);
    }

    // Host symbol behind a directive argument: addr, else the last callsite
    // binding, else a variable of the same name.
    Symbol arg_symbol(const std::string& label, const HmppArg& a, int line)
    {
        std::string name = a.addr ? *a.addr : a.name;
        if (!name.empty() && name[0] == '&') name.erase(0, 1);
        if (!a.addr) {
            if (auto it = binding_[label].find(a.name); it != binding_[label].end()) return it->second;
        }
        const Symbol* s = resolve(name);
        if (!s) throw std::runtime_error(unit_.file + ":" + std::to_string(line) + ": unknown host variable '" + name + "'");
        return *s;
    }

    const Codelet& codelet_for(const HmppDirective& d, int line) const
    {
        auto it = codelets_.find(d.label);
        if (it == codelets_.end())
            throw std::runtime_error(unit_.file + ":" + std::to_string(line) + ": directive names unknown codelet '" +
                                     d.label + "'");
        return it->second;
    }

    void directive(const Pragma& p)
    {
        auto d = parse_hmpp_directive(p.text);
        switch (d.kind) {
        case HmppKind::Group:
        case HmppKind::Mapbyname:
        case HmppKind::Codelet:
        case HmppKind::Gridify:
        case HmppKind::Callsite: return;
        case HmppKind::Synchronize: synchronize(d.label); return;
        case HmppKind::Release: {
            std::string scope = d.label.empty() ? d.group : codelet_for(d, p.line).scope;
            for (auto& [label, c] : codelets_)
                if (c.scope == scope && pending_.count(label)) synchronize(label);
            for (auto& [key, fresh] : dev_fresh_)
                if (key.first == scope) fresh = false;
            return;
        }
        case HmppKind::Advancedload: {
            const Codelet& c = codelet_for(d, p.line);
            for (const auto& a : d.args) upload(c.scope, arg_symbol(d.label, a, p.line), p.line, "advancedload");
            return;
        }
        case HmppKind::Delegatedstore: {
            const Codelet& c = codelet_for(d, p.line);
            if (pending_.count(d.label)) synchronize(d.label);
            for (const auto& a : d.args) download(c.scope, arg_symbol(d.label, a, p.line), p.line, "delegatedstore");
            return;
        }
        }
    }

    void synchronize(const std::string& label)
    {
        auto it = pending_.find(label);
        if (it == pending_.end()) return;
        PendingAsync pa = std::move(it->second);
        pending_.erase(it);
        clock_ = std::max(clock_, pa.end);
        const std::string& scope = codelets_.at(label).scope;
        for (const auto& s : pa.downloads) download(scope, s, 0, "asynchronous callsite");
    }

    void kernel_call(const Expr& call, const HmppDirective* site, int line)
    {
        const Codelet& c = codelets_.at(call.text);
        if (pending_.count(call.text)) synchronize(call.text);
        const auto& params = c.fn->params;
        if (params.size() != call.kids.size())
            throw std::runtime_error(unit_.file + ":" + std::to_string(line) + ": argument count mismatch calling " +
                                     call.text);
        Frame kf{c.fn, {}, {}};
        std::vector<Symbol> outputs;
        auto& bind = binding_[call.text];
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto& pd = params[k].decl;
            const Expr& arg = call.kids[k];
            bool buffer = !pd.dims.empty() || pd.pointer > 0;
            if (!buffer) {
                host_expr(arg, line);
                if (auto v = eval(arg)) kf.env[pd.name] = *v;
                Symbol tmp{call.text + "::" + pd.name, static_cast<double>(element_size(params[k].type.base)), false};
                kf.locals[pd.name] = tmp;
                clock_ = std::max(clock_, gpu_free_);
                double t = tmp.bytes / p_.h2d_bandwidth;
                clock_ += t;
                r_.load_s += t;
                r_.transfers.h2d_bytes += tmp.bytes;
                r_.transfers.h2d_scalars++;
                continue;
            }
            const Expr* target = &arg;
            while (target->kind == ExprKind::Paren) target = &target->kids[0];
            if (target->kind == ExprKind::Unary && target->text == "&") target = &target->kids[0];
            const Symbol* hs = target->is_ident() ? resolve(target->text) : nullptr;
            if (!hs)
                throw std::runtime_error(unit_.file + ":" + std::to_string(line) + ": cannot bind argument " +
                                         std::to_string(k + 1) + " of " + call.text);
            Symbol s = *hs;
            bind[pd.name] = s;
            kf.locals[pd.name] = s;

            const HmppArg* cfg = c.dir.find_arg(pd.name);
            std::string io = cfg && cfg->io ? *cfg->io : "in";
            bool noupdate = site && site->find_arg(pd.name) && site->find_arg(pd.name)->noupdate;
            bool reads = c.reads.count(pd.name) > 0;
            if ((io == "in" || io == "inout") && !noupdate) {
                upload(c.scope, s, line, "callsite of " + call.text);
            } else if (reads && !dev_fresh(c.scope, s.id)) {
                throw SoundnessError(unit_.file + ":" + std::to_string(line) + ": " + call.text + " reads '" + s.id +
                                     "' which is not resident on the device");
            }
            if (io == "out" || io == "inout") outputs.push_back(s);
        }

        // kernel work in closed form
        frames_.push_back(std::move(kf));
        bool saved = in_kernel_;
        in_kernel_ = true;
        kernel_ops_ = 0;
        if (c.fn->body) exec(*c.fn->body);
        in_kernel_ = saved;
        double ops = kernel_ops_;
        frames_.pop_back();

        r_.transfers.launches++;
        clock_ += p_.kernel_launch_overhead;
        r_.launch_s += p_.kernel_launch_overhead;
        double t = ops / p_.gpu_throughput;
        r_.gpu_s += t;
        r_.gpu_ops += ops;
        gpu_busy_ += t;
        double start = std::max(clock_, gpu_free_);
        gpu_free_ = start + t;

        for (const auto& pr : c.fn->params) {
            if (!c.writes.count(pr.decl.name) || !bind.count(pr.decl.name)) continue;
            if (pr.decl.dims.empty() && pr.decl.pointer == 0) continue;
            const Symbol& s = bind[pr.decl.name];
            for (auto& [key, fresh] : dev_fresh_)
                if (key.second == s.id) fresh = false;
            dev_fresh_[{c.scope, s.id}] = true;
            host_fresh_[s.id] = false;
        }

        if (site && site->asynchronous) {
            pending_[call.text] = PendingAsync{gpu_free_, outputs};
            return;
        }
        clock_ = gpu_free_;
        for (const auto& s : outputs) download(c.scope, s, line, "callsite of " + call.text);
    }

    // ---- statements

    bool fn_has_events(const std::string& name)
    {
        if (codelets_.count(name)) return true;
        if (auto it = fn_events_.find(name); it != fn_events_.end()) return it->second;
        const FunctionDef* fn = unit_.find_definition(name);
        fn_events_[name] = false; // recursion guard
        bool r = fn && fn->body && has_events(*fn->body);
        fn_events_[name] = r;
        return r;
    }

    bool expr_has_events(const Expr& e)
    {
        bool r = false;
        for_each_expr(e, [&](const Expr& x) {
            if (x.kind == ExprKind::Call && fn_has_events(x.text)) r = true;
        });
        return r;
    }

    bool has_events(const Stmt& s)
    {
        bool r = false;
        for_each_stmt(s, [&](const Stmt& t) {
            if (r) return;
            if (t.kind == StmtKind::Directive) r = true;
            for (const auto& p : t.pragmas)
                if (p.family == PragmaFamily::Hmpp) r = true;
            for_each_own_expr(t, [&](const Expr& e) { r = r || expr_has_events(e); });
        });
        return r;
    }

    void call_defined(const Expr& call, const FunctionDef& fn, int line)
    {
        if (++depth_ > kMaxDepth) throw std::runtime_error(unit_.file + ":" + std::to_string(line) + ": call depth limit reached in '" + fn.name + "'");
        Frame f{&fn, {}, {}};
        for (std::size_t k = 0; k < fn.params.size() && k < call.kids.size(); ++k) {
            const auto& pd = fn.params[k].decl;
            const Expr& arg = call.kids[k];
            if ((!pd.dims.empty() || pd.pointer > 0) && arg.is_ident()) {
                if (const Symbol* s = resolve(arg.text)) {
                    f.locals[pd.name] = *s;
                    continue;
                }
            }
            f.locals[pd.name] = Symbol{fn.name + "::" + pd.name, 0, false};
            if (auto v = eval(arg)) f.env[pd.name] = *v;
        }
        frames_.push_back(std::move(f));
        exec(*fn.body);
        frames_.pop_back();
        --depth_;
    }

    // Host or kernel evaluation of one expression statement's expression.
    void run_expr(const Expr& e, int line, const std::vector<Pragma>& pragmas)
    {
        for (const auto& p : pragmas) {
            if (p.family != PragmaFamily::Hmpp) continue;
            auto d = parse_hmpp_directive(p.text);
            if (d.kind == HmppKind::Callsite && !codelets_.count(d.label))
                throw std::runtime_error(unit_.file + ":" + std::to_string(p.line) + ": callsite names unknown codelet '" +
                                         d.label + "'");
        }
        if (!in_kernel_ && e.kind == ExprKind::Call && codelets_.count(e.text)) {
            std::optional<HmppDirective> site;
            for (const auto& p : pragmas)
                if (p.family == PragmaFamily::Hmpp) {
                    auto d = parse_hmpp_directive(p.text);
                    if (d.kind == HmppKind::Callsite) site = d;
                }
            kernel_call(e, site ? &*site : nullptr, line);
            return;
        }
        host_expr(e, line);
        cpu(expr_ops(e));
        for_each_expr(e, [&](const Expr& x) {
            if (x.kind != ExprKind::Call) return;
            if (codelets_.count(x.text))
                throw std::runtime_error(unit_.file + ":" + std::to_string(line) + ": codelet " + x.text +
                                         " called inside an expression");
            if (const FunctionDef* fn = unit_.find_definition(x.text); fn && fn->body) call_defined(x, *fn, line);
        });
        apply(e);
    }

    // Loop bookkeeping shared by the replayed and closed-form paths.
    struct LoopShape {
        std::string var;
        std::string op;
        const Expr* bound = nullptr;
        bool var_left = true;
        std::optional<long long> delta;
    };

    std::optional<LoopShape> loop_shape(const Stmt& s)
    {
        if (!s.expr || s.expr->kind != ExprKind::Binary) return std::nullopt;
        const Expr& c = *s.expr;
        static const std::set<std::string> cmp = {"<", "<=", ">", ">=", "!="};
        if (!cmp.count(c.text)) return std::nullopt;
        LoopShape sh;
        const Expr* l = &c.kids[0];
        const Expr* r = &c.kids[1];
        while (l->kind == ExprKind::Paren) l = &l->kids[0];
        while (r->kind == ExprKind::Paren) r = &r->kids[0];
        if (l->is_ident()) {
            sh.var = l->text;
            sh.op = c.text;
            sh.bound = r;
        } else if (r->is_ident()) {
            sh.var = r->text;
            sh.op = flip(c.text);
            sh.bound = l;
        } else {
            return std::nullopt;
        }
        auto ev = [this](const Expr& x) { return eval(x); };
        if (s.kind == StmtKind::For) {
            if (s.step) sh.delta = step_of(*s.step, sh.var, ev);
        } else {
            const Stmt& body = s.body();
            std::vector<const Stmt*> list;
            if (body.kind == StmtKind::Compound)
                for (const auto& ch : body.children) list.push_back(&ch);
            else
                list.push_back(&body);
            int found = 0;
            for (const Stmt* ch : list) {
                if (ch->kind != StmtKind::Expr || !ch->expr) continue;
                if (auto d = step_of(*ch->expr, sh.var, ev)) {
                    sh.delta = d;
                    ++found;
                }
            }
            // any other write to the variable makes the count unknown
            std::set<std::string> writes = assigned_in(body);
            if (found != 1 || !writes.count(sh.var)) sh.delta.reset();
            else {
                int others = 0;
                for_each_stmt(body, [&](const Stmt& t) {
                    for_each_own_expr(t, [&](const Expr& e) {
                        std::set<std::string> rd, wr;
                        collect_access(e, rd, wr);
                        if (wr.count(sh.var) && !step_of(e, sh.var, ev)) ++others;
                    });
                });
                if (others) sh.delta.reset();
            }
        }
        return sh;
    }

    void closed_form_loop(const Stmt& s)
    {
        if (s.kind == StmtKind::For) exec(s.children[0]);
        auto shape = loop_shape(s);
        std::optional<long long> n;
        std::optional<long long> start;
        if (shape && shape->delta) {
            start = lookup(shape->var);
            auto bound = eval(*shape->bound);
            if (start && bound) n = trip_count(*start, shape->op, *bound, *shape->delta);
        }
        long long trips = n ? *n : 1; // unknown counts cost one iteration
        std::set<std::string> changed = assigned_in(s.body());
        if (s.step) {
            std::set<std::string> rd;
            collect_access(*s.step, rd, changed);
        }

        double cond_ops = s.expr ? expr_ops(*s.expr) : 0;
        double step_ops = s.step ? expr_ops(*s.step) : 0;
        if (s.expr) host_expr(*s.expr, s.line);
        for (const auto& c : changed) set_value(c, std::nullopt);
        if (trips > 0) {
            double before = counter();
            exec_body_once(s);
            double body_ops = counter() - before;
            uncount(body_ops);
            cpu(body_ops * static_cast<double>(trips));
        }
        cpu(cond_ops * static_cast<double>(trips + 1) + step_ops * static_cast<double>(trips));
        for (const auto& c : changed) set_value(c, std::nullopt);
        if (n && start && shape) set_value(shape->var, *start + *n * *shape->delta);
    }

    // Body with CPU time accounted through counter()/uncount().
    void exec_body_once(const Stmt& s)
    {
        Flow f = exec(s.body());
        (void)f;
        if (s.step) {
            host_expr(*s.step, s.line);
            apply(*s.step);
        }
    }

    double counter() const { return in_kernel_ ? kernel_ops_ : r_.cpu_ops; }

    void uncount(double ops)
    {
        if (in_kernel_) {
            kernel_ops_ -= ops;
            return;
        }
        double t = ops / p_.cpu_throughput;
        clock_ -= t;
        cpu_busy_ -= t;
        r_.cpu_s -= t;
        r_.cpu_ops -= ops;
    }

    Flow replayed_loop(const Stmt& s)
    {
        if (s.kind == StmtKind::For) exec(s.children[0]);
        long long guard = 0;
        while (true) {
            if (s.expr) {
                host_expr(*s.expr, s.line);
                cpu(expr_ops(*s.expr));
                auto c = eval(*s.expr);
                if (!c)
                    throw std::runtime_error(unit_.file + ":" + std::to_string(s.line) +
                                             ": loop condition of a loop holding directives is not computable");
                apply(*s.expr);
                if (!*c) break;
            }
            if (++guard > kMaxReplayIterations)
                throw std::runtime_error(unit_.file + ":" + std::to_string(s.line) + ": loop replay limit exceeded");
            Flow f = exec(s.body());
            if (f == Flow::Return) return f;
            if (f == Flow::Break) break;
            if (s.step) {
                host_expr(*s.step, s.line);
                cpu(expr_ops(*s.step));
                apply(*s.step);
            }
        }
        return Flow::Normal;
    }

    Flow exec(const Stmt& s)
    {
        switch (s.kind) {
        case StmtKind::Compound:
            for (const auto& c : s.children) {
                Flow f = exec(c);
                if (f != Flow::Normal) return f;
            }
            return Flow::Normal;
        case StmtKind::Directive:
            if (!in_kernel_) directive(s.pragmas[0]);
            return Flow::Normal;
        case StmtKind::Decl:
            for (const auto& d : s.decls) {
                if (d.init) {
                    host_expr(*d.init, s.line);
                    cpu(expr_ops(*d.init));
                }
            }
            declare(s);
            if (!in_kernel_)
                for (const auto& d : s.decls) host_writes({d.name});
            return Flow::Normal;
        case StmtKind::Expr:
            if (s.expr) run_expr(*s.expr, s.line, s.pragmas);
            return Flow::Normal;
        case StmtKind::Empty: return Flow::Normal;
        case StmtKind::If: {
            host_expr(*s.expr, s.line);
            cpu(expr_ops(*s.expr));
            auto c = eval(*s.expr);
            apply(*s.expr);
            if (c) {
                if (*c) return exec(s.children[0]);
                return s.children.size() > 1 ? exec(s.children[1]) : Flow::Normal;
            }
            if (!in_kernel_ && has_events(s)) return exec(s.children[0]); // then-branch assumed
            // unknown branch: cost the dearer one
            Env saved = frame().env;
            double before = counter();
            exec(s.children[0]);
            double a = counter() - before;
            uncount(a);
            frame().env = saved;
            double b = 0;
            if (s.children.size() > 1) {
                exec(s.children[1]);
                b = counter() - before;
                uncount(b);
            }
            frame().env = saved;
            for (const auto& c2 : assigned_in(s)) set_value(c2, std::nullopt);
            cpu(std::max(a, b));
            return Flow::Normal;
        }
        case StmtKind::For:
        case StmtKind::While:
            if (!in_kernel_ && has_events(s)) return replayed_loop(s);
            closed_form_loop(s);
            return Flow::Normal;
        case StmtKind::Return:
            if (s.expr) {
                host_expr(*s.expr, s.line);
                cpu(expr_ops(*s.expr));
            }
            return Flow::Return;
        case StmtKind::Break: return Flow::Break;
        case StmtKind::Continue: return Flow::Continue;
        }
        return Flow::Normal;
    }

    const SourceUnit& unit_;
    CostModelParams p_;
    SimResult r_;
    double clock_ = 0, cpu_busy_ = 0, gpu_busy_ = 0, gpu_free_ = 0;
    double kernel_ops_ = 0;
    bool in_kernel_ = false;
    int depth_ = 0;
    std::vector<Frame> frames_;
    std::map<std::string, Codelet> codelets_;
    std::map<std::string, bool> fn_events_;
    std::map<std::string, bool> host_fresh_;
    std::map<std::pair<std::string, std::string>, bool> dev_fresh_;
    std::map<std::string, std::map<std::string, Symbol>> binding_;
    Pending pending_;
};

} // namespace

SimResult simulate_variant(const SourceUnit& variant, const CostModelParams& params)
{
    return Simulator(variant, params).run();
}

SimResult simulate_source(const std::string& text, const CostModelParams& params)
{
    return simulate_variant(parse_translation_unit(text, "<variant>"), params);
}

} // namespace omp2hmpp
