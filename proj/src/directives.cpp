#include "omp2hmpp/directives.hpp"
#include "omp2hmpp/cfront.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace omp2hmpp {

namespace {

// Cursor over the tokens of a pragma's text.
class Cursor {
  public:
    explicit Cursor(std::string_view text) : toks_(tokenize(text)) { toks_.pop_back(); }

    bool done() const { return pos_ >= toks_.size(); }
    const Token& cur() const { return toks_[pos_]; }
    bool is(std::string_view s) const { return !done() && cur().text == s; }
    bool accept(std::string_view s)
    {
        if (!is(s)) return false;
        ++pos_;
        return true;
    }
    void expect(std::string_view s, const std::string& context)
    {
        if (!accept(s)) error("malformed clause '" + context + "': expected '" + std::string(s) + "'");
    }
    std::string word(const std::string& context)
    {
        if (done() || (cur().kind != TokKind::Ident && cur().kind != TokKind::Keyword))
            error("malformed clause '" + context + "': expected identifier");
        return toks_[pos_++].text;
    }
    const Token& next() { return toks_[pos_++]; }

    // Raw text up to (not including) the next top-level ',' or ';'.
    std::string until_separator()
    {
        std::string s;
        int depth = 0;
        while (!done()) {
            const auto& t = cur();
            if (depth == 0 && (t.text == "," || t.text == ";")) break;
            if (t.text == "(" || t.text == "[") ++depth;
            if (t.text == ")" || t.text == "]") --depth;
            s += t.text;
            ++pos_;
        }
        return s;
    }

    [[noreturn]] void error(const std::string& msg) const { throw CompileError(Diagnostic{"", 0, 0, msg}); }

  private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

std::vector<std::string> ident_list(Cursor& c, const std::string& clause)
{
    std::vector<std::string> out;
    c.expect("(", clause);
    if (c.accept(")")) return out;
    do out.push_back(c.word(clause));
    while (c.accept(","));
    c.expect(")", clause);
    return out;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + xs[i];
    return s;
}

} // namespace

OmpPragma parse_omp_pragma(std::string_view text)
{
    Cursor c(text);
    if (!c.accept("omp")) c.error("not an OpenMP pragma");
    OmpPragma p;
    if (c.accept("parallel")) {
        p.kind = c.accept("for") ? OmpKind::ParallelFor : OmpKind::Parallel;
    } else if (c.accept("for")) {
        p.kind = OmpKind::For;
    } else {
        p.kind = OmpKind::None;
        std::string rest;
        while (!c.done()) rest += (rest.empty() ? "" : " ") + c.next().text;
        p.construct = rest;
        return p;
    }
    static const std::set<std::string, std::less<>> passthrough_args = {"firstprivate", "lastprivate", "schedule",
                                                                        "default",      "num_threads", "collapse"};
    while (!c.done()) {
        if (c.accept(",")) continue;
        std::string clause = c.word("clause");
        if (clause == "shared") {
            auto xs = ident_list(c, clause);
            p.shared.insert(p.shared.end(), xs.begin(), xs.end());
        } else if (clause == "private") {
            auto xs = ident_list(c, clause);
            p.privates.insert(p.privates.end(), xs.begin(), xs.end());
        } else if (clause == "reduction") {
            if (p.reduction) c.error("malformed clause 'reduction': only one reduction clause is supported");
            c.expect("(", clause);
            Reduction r;
            if (c.is("+") || c.is("*") || c.is("-")) r.op = c.next().text;
            else if (c.is("min") || c.is("max")) r.op = c.next().text;
            else c.error("malformed clause 'reduction': unsupported operator");
            c.expect(":", clause);
            r.var = c.word(clause);
            if (c.is(",")) c.error("malformed clause 'reduction': only one variable per reduction is supported");
            c.expect(")", clause);
            p.reduction = r;
        } else if (clause == "check") {
            if (p.check) c.error("malformed clause 'check': repeated");
            p.check = true;
        } else if (clause == "fixed") {
            if (p.fixed) c.error("malformed clause 'fixed': repeated");
            c.expect("(", clause);
            std::vector<unsigned> vals;
            while (!c.is(")")) {
                if (c.done() || c.cur().kind != TokKind::IntLit)
                    c.error("malformed clause 'fixed': expects three non-negative integers");
                vals.push_back(static_cast<unsigned>(std::stoul(c.next().text)));
                if (!c.accept(",")) break;
            }
            c.expect(")", clause);
            if (vals.size() != 3) c.error("fixed() expects exactly three values, got " + std::to_string(vals.size()));
            p.fixed = std::array<unsigned, 3>{vals[0], vals[1], vals[2]};
        } else if (clause == "nowait") {
            p.other.push_back(clause);
        } else if (passthrough_args.count(clause)) {
            c.expect("(", clause);
            std::string inner;
            int depth = 1;
            while (!c.done()) {
                if (c.is("(")) ++depth;
                if (c.is(")") && --depth == 0) break;
                inner += c.next().text;
                if (c.is(",") && depth == 1) {
                    inner += ",";
                    c.next();
                }
            }
            c.expect(")", clause);
            p.other.push_back(clause + "(" + inner + ")");
        } else {
            c.error("unknown OpenMP clause '" + clause + "'");
        }
    }
    if (p.check && p.fixed) c.error("check and fixed are mutually exclusive on one block");
    return p;
}

std::string render_omp(const OmpPragma& p)
{
    std::string s = "omp";
    switch (p.kind) {
    case OmpKind::Parallel: s += " parallel"; break;
    case OmpKind::ParallelFor: s += " parallel for"; break;
    case OmpKind::For: s += " for"; break;
    case OmpKind::None: return s + (p.construct.empty() ? "" : " " + p.construct);
    }
    if (p.reduction) s += " reduction(" + p.reduction->op + ":" + p.reduction->var + ")";
    if (!p.shared.empty()) s += " shared(" + join(p.shared, ", ") + ")";
    if (!p.privates.empty()) s += " private(" + join(p.privates, ", ") + ")";
    for (const auto& o : p.other) s += " " + o;
    return s;
}

std::string omp_text_without_tool_clauses(std::string_view text)
{
    auto toks = tokenize(text);
    toks.pop_back();
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].text == "check") continue;
        if (toks[i].text == "fixed" && i + 1 < toks.size() && toks[i + 1].text == "(") {
            while (i < toks.size() && toks[i].text != ")") ++i;
            continue;
        }
        const std::string& t = toks[i].text;
        bool glue_left = t == "(" || t == ")" || t == "," || t == ":" ||
                         (!out.empty() && (out.back() == '(' || out.back() == ':'));
        if (!out.empty() && !glue_left) out += ' ';
        out += t;
        if (t == ",") out += ' ';
    }
    // `a, b` spacing inside lists, no space before ')'.
    std::string cleaned;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == ' ' && i + 1 < out.size() && (out[i + 1] == ' ' || out[i + 1] == ')')) continue;
        cleaned += out[i];
    }
    while (!cleaned.empty() && cleaned.back() == ' ') cleaned.pop_back();
    return cleaned;
}

// ---- HMPP ------------------------------------------------------------------

std::string_view hmpp_kind_name(HmppKind k)
{
    switch (k) {
    case HmppKind::Codelet: return "codelet";
    case HmppKind::Callsite: return "callsite";
    case HmppKind::Group: return "group";
    case HmppKind::Mapbyname: return "mapbyname";
    case HmppKind::Advancedload: return "advancedload";
    case HmppKind::Delegatedstore: return "delegatedstore";
    case HmppKind::Synchronize: return "synchronize";
    case HmppKind::Release: return "release";
    case HmppKind::Gridify: return "gridify";
    }
    return "";
}

HmppArg& HmppDirective::arg(const std::string& name)
{
    for (auto& a : args)
        if (a.name == name) return a;
    args.push_back(HmppArg{name, {}, {}, {}, false, false});
    return args.back();
}

const HmppArg* HmppDirective::find_arg(const std::string& name) const
{
    for (const auto& a : args)
        if (a.name == name) return &a;
    return nullptr;
}

namespace {

std::optional<HmppKind> kind_from_word(std::string_view w)
{
    static const std::map<std::string, HmppKind, std::less<>> m = {
        {"codelet", HmppKind::Codelet},           {"callsite", HmppKind::Callsite},
        {"group", HmppKind::Group},               {"mapbyname", HmppKind::Mapbyname},
        {"advancedload", HmppKind::Advancedload}, {"delegatedstore", HmppKind::Delegatedstore},
        {"synchronize", HmppKind::Synchronize},   {"release", HmppKind::Release}};
    auto it = m.find(w);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::string unquote(const std::string& s)
{
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

void parse_args_clause(Cursor& c, HmppDirective& d)
{
    c.expect("[", "args");
    std::vector<std::string> names;
    bool star = false;
    do {
        if (c.accept("*")) star = true;
        else names.push_back(c.word("args"));
    } while (c.accept(","));
    c.expect("]", "args");
    if (!c.accept(".")) {
        for (const auto& n : names) d.arg(n).listed = true;
        return;
    }
    std::string prop = c.word("args");
    c.expect("=", "args");
    std::string value = c.until_separator();
    if (star) {
        if (prop != "transfer" || value != "auto") c.error("unsupported property on args[*]: " + prop);
        d.transfer_auto = true;
        return;
    }
    for (const auto& n : names) {
        auto& a = d.arg(n);
        if (prop == "io") {
            if (value != "in" && value != "out" && value != "inout") c.error("invalid io value '" + value + "'");
            a.io = value;
        } else if (prop == "size") {
            a.size = value;
        } else if (prop == "addr") {
            a.addr = unquote(value);
        } else if (prop == "noupdate") {
            a.noupdate = value == "true";
        } else if (prop == "transfer") {
            if (value != "auto") c.error("unsupported transfer mode '" + value + "'");
        } else {
            c.error("unknown args property '" + prop + "'");
        }
    }
}

} // namespace

HmppDirective parse_hmpp_directive(std::string_view text)
{
    Cursor c(canonicalize_pragma_text(text));
    HmppDirective d;
    if (c.accept("hmppcg")) {
        d.kind = HmppKind::Gridify;
        c.expect("gridify", "gridify");
        c.expect("(", "gridify");
        do d.gridify.push_back(c.until_separator());
        while (c.accept(","));
        if (!d.gridify.empty()) {
            // until_separator swallowed the closing paren of the last entry.
            auto& last = d.gridify.back();
            if (!last.empty() && last.back() == ')') last.pop_back();
        }
        if (c.accept(",")) {
            c.expect("reduce", "reduce");
            c.expect("(", "reduce");
            Reduction r;
            r.op = c.next().text;
            c.expect(":", "reduce");
            r.var = c.word("reduce");
            c.expect(")", "reduce");
            d.reduce = r;
        }
        if (!c.done()) c.error("unexpected '" + c.cur().text + "' in hmppcg directive");
        return d;
    }
    if (!c.accept("hmpp")) c.error("not an HMPP pragma");
    if (c.accept("<")) {
        d.group = c.word("group");
        c.expect(">", "group");
    }
    std::string w = c.word("directive");
    auto k = kind_from_word(w);
    if (!k) {
        d.label = w;
        w = c.word("directive");
        k = kind_from_word(w);
        if (!k) c.error("unknown HMPP directive '" + w + "'");
    }
    d.kind = *k;
    while (!c.done()) {
        if (!c.accept(",") && !c.accept(";")) c.error("expected ',' in HMPP directive, got '" + c.cur().text + "'");
        if (c.done()) break;
        if (c.accept("target")) {
            c.expect("=", "target");
            std::string t = c.word("target");
            if (t != "CUDA") c.error("unsupported target '" + t + "' (only CUDA)");
            d.target_cuda = true;
        } else if (c.accept("args")) {
            parse_args_clause(c, d);
        } else if (c.accept("asynchronous")) {
            d.asynchronous = true;
        } else if (d.kind == HmppKind::Mapbyname) {
            d.mapped.push_back(c.word("mapbyname"));
        } else {
            c.error("unexpected '" + c.cur().text + "' in HMPP directive");
        }
    }
    for (const auto& a : d.args)
        if (a.noupdate && d.kind != HmppKind::Callsite) c.error("noupdate is only valid on a callsite argument");
    if (d.kind == HmppKind::Mapbyname && d.group.empty()) c.error("mapbyname is only valid inside a group");
    return d;
}

std::string render_directive_text(const HmppDirective& d)
{
    if (d.kind == HmppKind::Gridify) {
        std::string s = "hmppcg gridify(" + join(d.gridify, ", ") + ")";
        if (d.reduce) s += ", reduce(" + d.reduce->op + ":" + d.reduce->var + ")";
        return s;
    }
    std::vector<std::string> parts;
    std::string head = "hmpp";
    if (!d.group.empty()) head += " <" + d.group + ">";
    if (!d.label.empty()) head += " " + d.label;
    head += " " + std::string(hmpp_kind_name(d.kind));
    parts.push_back(head);
    if (d.target_cuda) parts.push_back(d.kind == HmppKind::Group ? "target=CUDA" : "target = CUDA");
    if (!d.mapped.empty()) parts.push_back(join(d.mapped, ", "));

    // Coalesce names sharing one property value, in first-appearance order.
    auto coalesce = [&](auto pred, auto value, const std::string& prop) {
        std::vector<std::pair<std::string, std::vector<std::string>>> groups;
        for (const auto& a : d.args) {
            if (!pred(a)) continue;
            std::string v = value(a);
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == v; });
            if (it == groups.end()) groups.push_back({v, {a.name}});
            else it->second.push_back(a.name);
        }
        for (const auto& [v, names] : groups) {
            std::string p = "args[" + join(names, ", ") + "]";
            if (!prop.empty()) p += "." + prop + "=" + v;
            parts.push_back(p);
        }
    };
    coalesce([](const HmppArg& a) { return a.listed; }, [](const HmppArg&) { return std::string(); }, "");
    coalesce([](const HmppArg& a) { return a.io.has_value(); }, [](const HmppArg& a) { return *a.io; }, "io");
    for (const auto& a : d.args)
        if (a.size) parts.push_back("args[" + a.name + "].size=" + *a.size);
    for (const auto& a : d.args)
        if (a.addr) parts.push_back("args[" + a.name + "].addr=\"" + *a.addr + "\"");
    coalesce([](const HmppArg& a) { return a.noupdate; }, [](const HmppArg&) { return std::string("true"); },
             "noupdate");
    if (d.transfer_auto) parts.push_back("args[*].transfer=auto");
    if (d.asynchronous) parts.push_back("asynchronous");
    return join(parts, ", ");
}

std::vector<std::string> wrap_pragma_text(std::string_view text)
{
    std::string full = "#pragma " + std::string(text);
    bool hmpp = text.rfind("hmpp", 0) == 0;
    if (!hmpp || full.size() <= kPragmaWidth) return {full};
    std::string family = text.rfind("hmppcg", 0) == 0 ? "hmppcg" : "hmpp";

    // Top-level ", " separated segments.
    std::vector<std::string> segs;
    std::string cur;
    int depth = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (ch == '"') quoted = !quoted;
        if (!quoted) {
            if (ch == '[' || ch == '(') ++depth;
            if (ch == ']' || ch == ')') --depth;
            if (depth == 0 && ch == ',') {
                segs.push_back(cur);
                cur.clear();
                while (i + 1 < text.size() && text[i + 1] == ' ') ++i;
                continue;
            }
        }
        cur += ch;
    }
    segs.push_back(cur);

    std::vector<std::string> lines;
    std::string line = "#pragma " + segs[0];
    for (std::size_t i = 1; i < segs.size(); ++i) {
        std::string candidate = line + ", " + segs[i];
        // Room for the trailing ", &" when more segments follow.
        std::size_t reserve = i + 1 < segs.size() ? 3 : 0;
        if (candidate.size() + reserve > kPragmaWidth) {
            lines.push_back(line + ", &");
            line = "#pragma " + family + " & " + segs[i];
        } else {
            line = candidate;
        }
    }
    lines.push_back(line);
    return lines;
}

std::vector<std::string> render_directive(const HmppDirective& d)
{
    return wrap_pragma_text(render_directive_text(d));
}

bool equivalent(const HmppDirective& a, const HmppDirective& b)
{
    auto norm = [](HmppDirective d) {
        std::sort(d.args.begin(), d.args.end(), [](const HmppArg& x, const HmppArg& y) { return x.name < y.name; });
        return d;
    };
    return norm(a) == norm(b);
}

} // namespace omp2hmpp
