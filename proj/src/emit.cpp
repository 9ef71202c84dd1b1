#include "omp2hmpp/emit.hpp"
#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/directives.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

namespace omp2hmpp {

namespace {

int max_id(const SourceUnit& u)
{
    int m = 0;
    for (const auto& it : u.items) {
        if (it.kind == TopItem::Kind::Global) m = std::max(m, it.global.id);
        else if (it.fn.body)
            for_each_stmt(*it.fn.body, [&](const Stmt& s) { m = std::max(m, s.id); });
    }
    return m;
}

// Braces around loop and if bodies so every insertion point is a list gap.
void normalize_bodies(Stmt& s, int& next, const std::set<int>& kernels)
{
    if (kernels.count(s.id)) return;
    auto wrap = [&](Stmt& b) {
        if (b.kind == StmtKind::Compound) return;
        int line = b.line;
        Stmt c = Stmt::compound({std::move(b)});
        c.id = next++;
        c.line = line;
        b = std::move(c);
    };
    if (s.kind == StmtKind::If)
        for (auto& c : s.children) wrap(c);
    if (s.is_loop()) wrap(s.body());
    for (auto& c : s.children) normalize_bodies(c, next, kernels);
}

std::set<std::string> arrays_used(const SourceUnit& u, const FunctionDef& fn, const Stmt& block)
{
    auto syms = visible_symbols(u, fn, block.id);
    std::set<std::string> out;
    for_each_stmt(block, [&](const Stmt& s) {
        for_each_own_expr(s, [&](const Expr& e) {
            for_each_expr(e, [&](const Expr& k) {
                if (!k.is_ident()) return;
                auto it = syms.find(k.text);
                if (it != syms.end() && it->second.rank() > 0) out.insert(k.text);
            });
        });
    });
    return out;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b)
{
    return std::any_of(a.begin(), a.end(), [&](const std::string& s) { return b.count(s) > 0; });
}

struct Kernel {
    const OmpBlock* block = nullptr;
    FlagSet flags;
    std::vector<CodeletParam> params;
    std::set<std::string> arrays;
    std::string label;
    std::string group;
    int group_line = 0;
};

Pragma hmpp_pragma(const HmppDirective& d, int line)
{
    return Pragma{d.kind == HmppKind::Gridify ? PragmaFamily::Hmppcg : PragmaFamily::Hmpp, render_directive_text(d),
                  line, 0};
}

bool calls_defined_function(const SourceUnit& u, const Stmt& s)
{
    bool found = false;
    for_each_stmt(s, [&](const Stmt& x) {
        for_each_own_expr(x, [&](const Expr& e) {
            for_each_expr(e, [&](const Expr& k) {
                if (k.kind != ExprKind::Call || k.text == "main") return;
                const FunctionDef* d = u.find_definition(k.text);
                if (d && d->body) found = true;
            });
        });
    });
    return found;
}

OmpPragma split_region_block(const OmpPragma& region, const OmpPragma& own)
{
    OmpPragma p = own;
    p.kind = OmpKind::ParallelFor;
    p.check = false;
    p.fixed.reset();
    auto merge = [](std::vector<std::string> a, const std::vector<std::string>& b) {
        for (const auto& x : b)
            if (std::find(a.begin(), a.end(), x) == a.end()) a.push_back(x);
        return a;
    };
    p.shared = merge(region.shared, own.shared);
    p.privates = merge(region.privates, own.privates);
    // nowait has no meaning on a combined construct
    p.other.erase(std::remove(p.other.begin(), p.other.end(), "nowait"), p.other.end());
    return p;
}

} // namespace

std::vector<BlockChoice> block_choices(const SourceUnit& unit)
{
    auto blocks = find_omp_blocks(unit);
    std::vector<BlockChoice> out;
    std::vector<std::pair<std::string, std::set<std::string>>> used;
    for (const auto& b : blocks) {
        if (!b.candidate()) continue;
        const FunctionDef* fn = unit.find_function(b.function);
        const Stmt* s = find_stmt(*fn->body, b.stmt_id);
        out.push_back(BlockChoice{b.stmt_id, b.check, b.fixed, false});
        used.emplace_back(b.function, arrays_used(unit, *fn, *s));
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j)
            if (i != j && used[i].first == used[j].first && intersects(used[i].second, used[j].second))
                out[i].group_eligible = true;
    return out;
}

UnitVariant uniform_variant(const SourceUnit& unit, const FlagSet& flags)
{
    UnitVariant v;
    std::vector<std::string> names;
    for (const auto& c : block_choices(unit)) {
        FlagSet f = flags;
        if (f.group && !c.group_eligible) f.group = false;
        v.plans.push_back(VariantPlan{c.block, f});
        v.signature.push_back(encode_signature(f));
        names.push_back(flag_name(f));
    }
    if (names.empty()) names.push_back("Original(OpenMP)");
    for (std::size_t i = 0; i < names.size(); ++i) v.name += (i ? "+" : "") + names[i];
    return v;
}

RenderedVariant emit_variant(const SourceUnit& unit, const UnitVariant& variant)
{
    RenderedVariant rv;
    rv.name = variant.name;
    rv.signature = variant.signature_text();
    rv.suffix = variant.file_suffix();

    SourceUnit u = unit;
    auto blocks = find_omp_blocks(u);

    std::set<int> kernel_ids;
    for (const auto& b : blocks) {
        if (!b.candidate()) continue;
        const FlagSet* f = variant.flags_for(b.stmt_id);
        if (!f) throw CompileError(Diagnostic{u.file, b.line, 0, "variant has no plan for this block"});
        if (!f->baseline) kernel_ids.insert(b.stmt_id);
    }

    if (!kernel_ids.empty()) {
        bool calls = false;
        for (const auto& b : blocks)
            if (kernel_ids.count(b.stmt_id)) {
                const FunctionDef* fn = u.find_function(b.function);
                calls = calls || calls_defined_function(u, *find_stmt(*fn->body, b.stmt_id));
            }
        if (calls) {
            InlineOptions io;
            io.within = kernel_ids;
            auto [inlined, report] = inline_calls(u, io);
            u = std::move(inlined);
            rv.inlined = report.removed;
            blocks = find_omp_blocks(u);
        }
        int next = max_id(u) + 1;
        std::set<std::string> fns;
        for (const auto& b : blocks)
            if (kernel_ids.count(b.stmt_id)) fns.insert(b.function);
        for (auto& it : u.items)
            if (it.kind == TopItem::Kind::Function && it.fn.body && fns.count(it.fn.name))
                normalize_bodies(*it.fn.body, next, kernel_ids);
    }

    // kernels, their parameters (all inferred on the untouched unit) and groups
    std::vector<Kernel> kernels;
    for (const auto& b : blocks) {
        if (!kernel_ids.count(b.stmt_id)) continue;
        const FunctionDef* fn = u.find_function(b.function);
        const Stmt& s = *find_stmt(*fn->body, b.stmt_id);
        Kernel k;
        k.block = &b;
        k.flags = *variant.flags_for(b.stmt_id);
        k.params = infer_codelet_params(u, *fn, s, b.omp);
        for (const auto& p : k.params)
            if (p.kind == CodeletParam::Kind::Array) k.arrays.insert(p.symbol);
        kernels.push_back(std::move(k));
    }
    {
        std::vector<int> parent(kernels.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (std::size_t i = 0; i < kernels.size(); ++i)
            for (std::size_t j = i + 1; j < kernels.size(); ++j) {
                const Kernel &a = kernels[i], &b = kernels[j];
                if (a.flags.group && b.flags.group && a.block->function == b.block->function &&
                    intersects(a.arrays, b.arrays))
                    parent[find(static_cast<int>(j))] = find(static_cast<int>(i));
            }
        std::map<int, std::string> names;
        for (std::size_t i = 0; i < kernels.size(); ++i) {
            if (!kernels[i].flags.group) continue;
            int root = find(static_cast<int>(i));
            if (!names.count(root)) {
                names[root] = "group" + std::to_string(rv.groups.size()) + "_" +
                              std::to_string(kernels[static_cast<std::size_t>(root)].block->line);
                rv.groups.push_back(names[root]);
            }
            kernels[i].group = names[root];
            kernels[i].group_line = kernels[static_cast<std::size_t>(root)].block->line;
        }
    }
    for (auto& k : kernels) {
        int region_line = k.group_line;
        if (!region_line && k.block->region >= 0) region_line = blocks[static_cast<std::size_t>(k.block->region)].line;
        k.label = codelet_label(region_line, k.block->line, k.block->function);
        rv.codelets.push_back(k.label);
    }

    // transfer plans per function, on the pre-outline code
    std::map<std::string, TransferPlan> plans;
    std::map<std::string, std::vector<KernelInfo>> infos;
    for (const auto& k : kernels) {
        KernelInfo ki;
        ki.block = k.block->stmt_id;
        ki.label = k.label;
        ki.group = k.group;
        ki.flags = k.flags;
        std::vector<std::string> reduced_out;
        for (const auto& p : k.params) {
            ki.uses.insert(p.symbol);
            ki.arg_of[p.symbol] = p.name;
            if (p.kind == CodeletParam::Kind::Scalar) continue;
            ki.order.push_back(p.symbol);
            if (p.kind == CodeletParam::Kind::Reduced) {
                ki.reduced.insert(p.symbol);
                reduced_out.push_back(p.symbol);
                continue;
            }
            ki.arrays.insert(p.symbol);
            if (p.io != "out" || k.flags.delegatedstore) ki.inputs.push_back(p.symbol);
            if (p.io != "in") ki.outputs.push_back(p.symbol);
        }
        ki.outputs.insert(ki.outputs.end(), reduced_out.begin(), reduced_out.end());
        infos[k.block->function].push_back(std::move(ki));
    }
    for (const auto& [fname, ks] : infos) plans[fname] = build_transfer_plan(u, *u.find_function(fname), ks);

    // outline
    std::map<int, CodeletDef> codelets;
    for (const auto& k : kernels) {
        Outlined o = outline_block(u, *k.block, k.label, &k.params);
        auto diags = check_global_scope(o.codelet, o.unit);
        if (!diags.empty()) {
            for (auto& d : diags)
                if (!d.line) d.line = k.block->line;
            throw CompileError(std::move(diags));
        }
        u = std::move(o.unit);
        o.codelet.group = k.group;
        codelets[k.block->stmt_id] = std::move(o.codelet);
    }

    int next = max_id(u) + 1;
    for (const auto& k : kernels) {
        const CodeletDef& c = codelets.at(k.block->stmt_id);
        const TransferPlan& plan = plans.at(k.block->function);

        HmppDirective cd;
        cd.kind = HmppKind::Codelet;
        cd.group = k.group;
        cd.label = k.label;
        cd.target_cuda = k.group.empty();
        for (const auto& p : c.params) {
            if (p.kind == CodeletParam::Kind::Scalar) continue;
            HmppArg& a = cd.arg(p.name);
            if (p.kind == CodeletParam::Kind::Reduced) {
                if (!k.flags.delegatedstore) a.io = "inout";
                a.size = "1";
                continue;
            }
            a.io = (k.flags.delegatedstore && !plan.fallback.count(p.symbol)) ? "in" : p.io;
            if (p.size) a.size = "(" + *p.size + ")";
        }
        cd.transfer_auto = k.flags.plain();
        for (auto& it : u.items)
            if (it.kind == TopItem::Kind::Function && it.fn.name == k.label) it.fn.pragmas = {hmpp_pragma(cd, 0)};

        HmppDirective cs;
        cs.kind = HmppKind::Callsite;
        cs.group = k.group;
        cs.label = k.label;
        if (auto it = plan.noupdate.find(k.block->stmt_id); it != plan.noupdate.end())
            for (const auto& p : c.params)
                if (it->second.count(p.symbol)) cs.arg(p.name).noupdate = true;
        cs.asynchronous = k.flags.asynchronous;
        FunctionDef* fn = u.find_function(k.block->function);
        Stmt* call = find_stmt(*fn->body, k.block->stmt_id);
        call->pragmas = {hmpp_pragma(cs, call->line)};
    }

    // standalone directives, bottom-up per list so indices stay valid
    std::set<std::string> group_names(rv.groups.begin(), rv.groups.end());
    for (auto& [fname, plan] : plans) {
        const auto& ks = infos.at(fname);
        auto info_for = [&](int block) -> const KernelInfo* {
            for (const auto& k : ks)
                if (k.block == block) return &k;
            return nullptr;
        };
        std::map<Gap, std::vector<Stmt>> at;
        for (const auto& d : plan.directives) {
            HmppDirective h;
            bool grouped = group_names.count(d.context) > 0;
            if (grouped) h.group = d.context;
            switch (d.kind) {
            case DirectiveKind::Group:
                h.kind = HmppKind::Group;
                h.target_cuda = true;
                break;
            case DirectiveKind::Mapbyname:
                h.kind = HmppKind::Mapbyname;
                h.mapped = d.symbols;
                break;
            case DirectiveKind::Synchronize:
                h.kind = HmppKind::Synchronize;
                h.label = d.label;
                break;
            case DirectiveKind::Release:
                h.kind = HmppKind::Release;
                if (!grouped) h.label = d.label;
                break;
            case DirectiveKind::Advancedload:
            case DirectiveKind::Delegatedstore: {
                h.kind = d.kind == DirectiveKind::Advancedload ? HmppKind::Advancedload : HmppKind::Delegatedstore;
                h.label = d.label;
                const KernelInfo* ki = info_for(d.kernel);
                for (const auto& s : d.symbols) {
                    HmppArg& a = h.arg(ki->arg_of.at(s));
                    a.listed = true;
                    a.addr = ki->reduced.count(s) ? "&" + s : s;
                }
                break;
            }
            }
            Stmt st = Stmt::directive(hmpp_pragma(h, 0));
            st.id = next++;
            at[d.gap].push_back(std::move(st));
        }
        FunctionDef* fn = u.find_function(fname);
        for (auto it = at.rbegin(); it != at.rend(); ++it) {
            Stmt* list = find_stmt(*fn->body, it->first.list);
            if (!list || list->kind != StmtKind::Compound)
                throw CompileError(Diagnostic{u.file, 0, 0, "internal: directive gap outside a statement list"});
            auto pos = list->children.begin() + std::min<std::ptrdiff_t>(it->first.index, list->children.size());
            list->children.insert(pos, it->second.begin(), it->second.end());
        }
    }

    // regions: split when any of their blocks moved to the accelerator
    for (const auto& r : blocks) {
        if (!r.is_region()) continue;
        bool moved = std::any_of(r.sub_blocks.begin(), r.sub_blocks.end(), [&](int i) {
            return kernel_ids.count(blocks[static_cast<std::size_t>(i)].stmt_id) > 0;
        });
        if (!moved) continue;
        FunctionDef* fn = u.find_function(r.function);
        Stmt* rs = find_stmt(*fn->body, r.stmt_id);
        auto& ps = rs->pragmas;
        ps.erase(std::remove_if(ps.begin(), ps.end(),
                                [&](const Pragma& p) { return p.family == PragmaFamily::Omp && p.line == r.line; }),
                 ps.end());
        for (int i : r.sub_blocks) {
            const OmpBlock& sb = blocks[static_cast<std::size_t>(i)];
            if (kernel_ids.count(sb.stmt_id)) continue;
            Stmt* s = find_stmt(*fn->body, sb.stmt_id);
            if (!s) continue;
            for (auto& p : s->pragmas)
                if (p.family == PragmaFamily::Omp && p.line == sb.line && sb.omp.kind == OmpKind::For)
                    p.text = render_omp(split_region_block(r.omp, sb.omp));
        }
    }

    // whatever stays OpenMP loses the tool clauses
    for (auto& it : u.items) {
        if (it.kind != TopItem::Kind::Function || !it.fn.body) continue;
        for_each_stmt(*it.fn.body, [](Stmt& s) {
            for (auto& p : s.pragmas)
                if (p.family == PragmaFamily::Omp) p.text = omp_text_without_tool_clauses(p.text);
        });
    }

    rv.source = print_unit(u);
    rv.manifest = count_directives(rv.source);
    return rv;
}

std::vector<RenderedVariant> emit_all(const SourceUnit& unit, std::size_t cap)
{
    std::vector<RenderedVariant> out;
    for (const auto& v : plans_for_unit(block_choices(unit), cap)) out.push_back(emit_variant(unit, v));
    return out;
}

std::map<std::string, int> count_directives(const std::string& text)
{
    static const std::set<std::string> words = {"codelet",     "callsite", "group",   "mapbyname", "advancedload",
                                                "delegatedstore", "synchronize", "release", "gridify"};
    std::map<std::string, int> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos || line.compare(b, 12, "#pragma hmpp") != 0) continue;
        std::string tok;
        auto flush = [&] {
            if (words.count(tok)) ++out[tok];
            tok.clear();
        };
        bool quoted = false;
        for (char ch : line.substr(b + 12)) {
            if (ch == '"') quoted = !quoted;
            if (!quoted && (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) tok += ch;
            else flush();
        }
        flush();
    }
    return out;
}

std::vector<std::filesystem::path> write_variants(const std::filesystem::path& dir, const std::string& stem,
                                                  const std::vector<RenderedVariant>& variants)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    std::ofstream manifest(dir / "manifest.txt");
    for (const auto& v : variants) {
        std::string file = stem + "__" + (v.suffix.empty() ? std::string("original") : v.suffix) + ".c";
        std::ofstream f(dir / file);
        f << v.source;
        if (!f) throw std::runtime_error("cannot write " + (dir / file).string());
        manifest << v.name << '\t' << v.signature << '\t' << file << '\n';
        out.push_back(dir / file);
    }
    if (!manifest) throw std::runtime_error("cannot write " + (dir / "manifest.txt").string());
    return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::vector<ManifestEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto a = line.find('\t');
        auto b = line.find('\t', a == std::string::npos ? a : a + 1);
        if (a == std::string::npos || b == std::string::npos)
            throw std::runtime_error(file.string() + ": malformed manifest line '" + line + "'");
        out.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
    }
    return out;
}

} // namespace omp2hmpp
