#include "omp2hmpp/cfront.hpp"

#include <map>
#include <set>

namespace omp2hmpp {

namespace {

const std::set<std::string, std::less<>> kStandaloneHmpp = {"group",          "mapbyname",   "advancedload",
                                                            "delegatedstore", "synchronize", "release"};

// Kind word of an HMPP pragma: the first known directive word after the
// optional `<group>` and label.
bool is_standalone_hmpp(const std::string& text)
{
    auto toks = tokenize(text);
    for (std::size_t i = 1; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind != TokKind::Ident && t.kind != TokKind::Keyword) continue;
        if (t.text == "codelet" || t.text == "callsite") return false;
        if (kStandaloneHmpp.count(t.text)) return true;
    }
    return false;
}

Pragma make_pragma(const Token& t)
{
    Pragma p;
    p.text = t.text;
    p.line = t.line;
    p.col = t.col;
    if (t.text.rfind("omp", 0) == 0 && (t.text.size() == 3 || std::isspace(static_cast<unsigned char>(t.text[3]))))
        p.family = PragmaFamily::Omp;
    else if (t.text.rfind("hmppcg", 0) == 0)
        p.family = PragmaFamily::Hmppcg;
    else if (t.text.rfind("hmpp", 0) == 0)
        p.family = PragmaFamily::Hmpp;
    else
        fail(t.line, t.col, "unsupported pragma '#pragma " + t.text + "'");
    return p;
}

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SourceUnit unit()
    {
        SourceUnit u;
        while (!at_end()) {
            std::vector<Pragma> pending;
            while (cur().kind == TokKind::Pragma) {
                Pragma p = make_pragma(cur());
                if (p.family == PragmaFamily::Omp)
                    fail(p.line, p.col, "OpenMP pragma outside a function body");
                pending.push_back(std::move(p));
                ++pos_;
            }
            if (at_end()) {
                if (!pending.empty())
                    fail(pending.back().line, pending.back().col, "dangling pragma: no following declaration");
                break;
            }
            top_level(u, std::move(pending));
        }
        return u;
    }

  private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(std::size_t n) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at_end() const { return cur().kind == TokKind::End; }

    bool is(std::string_view text) const
    {
        return (cur().kind == TokKind::Punct || cur().kind == TokKind::Keyword) && cur().text == text;
    }

    bool accept(std::string_view text)
    {
        if (!is(text)) return false;
        ++pos_;
        return true;
    }

    const Token& expect(std::string_view text)
    {
        if (!is(text)) error("expected '" + std::string(text) + "'");
        return toks_[pos_++];
    }

    [[noreturn]] void error(const std::string& msg) const
    {
        const auto& t = cur();
        std::string got = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
        fail(t.line, t.col, msg + " before " + got);
    }

    void reject_unsupported_keyword() const
    {
        static const std::set<std::string, std::less<>> ok = {"int",   "float", "double", "void",   "char",
                                                              "const", "if",    "else",   "for",    "while",
                                                              "return", "break", "continue"};
        if (cur().kind == TokKind::Keyword && !ok.count(cur().text))
            fail(cur().line, cur().col, "unsupported construct '" + cur().text + "'");
    }

    bool at_type() const
    {
        if (cur().kind != TokKind::Keyword) return false;
        const auto& s = cur().text;
        return s == "int" || s == "float" || s == "double" || s == "void" || s == "char" || s == "const";
    }

    TypeSpec type_spec()
    {
        TypeSpec t;
        if (accept("const")) t.is_const = true;
        reject_unsupported_keyword();
        if (accept("int")) t.base = BaseType::Int;
        else if (accept("float")) t.base = BaseType::Float;
        else if (accept("double")) t.base = BaseType::Double;
        else if (accept("void")) t.base = BaseType::Void;
        else if (accept("char")) t.base = BaseType::Char;
        else error("expected type");
        if (accept("const")) t.is_const = true;
        reject_unsupported_keyword();
        return t;
    }

    // Pointer/reference prefix and name; dims are parsed by the caller.
    Declarator declarator_head(bool name_optional)
    {
        Declarator d;
        d.line = cur().line;
        d.col = cur().col;
        while (accept("*")) ++d.pointer;
        if (accept("&")) d.reference = true;
        if (cur().kind == TokKind::Ident) {
            d.name = cur().text;
            d.line = cur().line;
            d.col = cur().col;
            ++pos_;
        } else if (!name_optional) {
            reject_unsupported_keyword();
            error("expected identifier");
        }
        return d;
    }

    void dims(Declarator& d)
    {
        while (accept("[")) {
            if (accept("]")) {
                d.dims.emplace_back(std::nullopt);
                continue;
            }
            d.dims.emplace_back(expression());
            expect("]");
        }
    }

    Expr initializer()
    {
        if (is("{")) {
            Expr e;
            e.kind = ExprKind::InitList;
            e.line = cur().line;
            e.col = cur().col;
            ++pos_;
            if (!is("}")) {
                do {
                    if (is("}")) break;
                    e.kids.push_back(initializer());
                } while (accept(","));
            }
            expect("}");
            return e;
        }
        return assignment();
    }

    void top_level(SourceUnit& u, std::vector<Pragma> pending)
    {
        reject_unsupported_keyword();
        int line = cur().line, col = cur().col;
        TypeSpec t = type_spec();
        Declarator head = declarator_head(false);
        if (is("(")) {
            FunctionDef fn;
            fn.ret = t;
            fn.ret_pointer = head.pointer;
            fn.name = head.name;
            fn.line = head.line;
            fn.col = head.col;
            fn.pragmas = std::move(pending);
            params(fn);
            if (is("{")) {
                fn.body = compound();
            } else {
                expect(";");
            }
            TopItem it;
            it.kind = TopItem::Kind::Function;
            it.fn = std::move(fn);
            u.items.push_back(std::move(it));
            return;
        }
        if (!pending.empty()) fail(pending.front().line, pending.front().col, "pragma must precede a function definition");
        Stmt s = decl_rest(t, std::move(head));
        s.line = line;
        s.col = col;
        TopItem it;
        it.kind = TopItem::Kind::Global;
        it.global = std::move(s);
        u.items.push_back(std::move(it));
    }

    void params(FunctionDef& fn)
    {
        expect("(");
        if (accept(")")) return;
        if (is("void") && ahead(1).kind == TokKind::Punct && ahead(1).text == ")") {
            pos_ += 2;
            return;
        }
        do {
            if (accept("...")) {
                fn.variadic = true;
                break;
            }
            Param p;
            p.type = type_spec();
            p.decl = declarator_head(true);
            dims(p.decl);
            fn.params.push_back(std::move(p));
        } while (accept(","));
        expect(")");
    }

    // Remaining declarators of a declaration whose first head is parsed.
    Stmt decl_rest(TypeSpec t, Declarator first)
    {
        Stmt s;
        s.kind = StmtKind::Decl;
        s.type = t;
        Declarator d = std::move(first);
        for (;;) {
            dims(d);
            if (accept("=")) d.init = initializer();
            s.decls.push_back(std::move(d));
            if (!accept(",")) break;
            d = declarator_head(false);
        }
        expect(";");
        return s;
    }

    Stmt compound()
    {
        Stmt s;
        s.kind = StmtKind::Compound;
        s.line = cur().line;
        s.col = cur().col;
        expect("{");
        std::vector<Pragma> pending;
        while (!is("}")) {
            if (at_end()) error("expected '}'");
            if (cur().kind == TokKind::Pragma) {
                Pragma p = make_pragma(cur());
                ++pos_;
                if (p.family == PragmaFamily::Hmpp && is_standalone_hmpp(p.text)) {
                    if (!pending.empty())
                        fail(pending.front().line, pending.front().col,
                             "pragma must be followed by a statement, not a standalone directive");
                    s.children.push_back(Stmt::directive(std::move(p)));
                } else {
                    pending.push_back(std::move(p));
                }
                continue;
            }
            Stmt c = statement();
            c.pragmas = std::move(pending);
            pending.clear();
            s.children.push_back(std::move(c));
        }
        if (!pending.empty())
            fail(pending.front().line, pending.front().col, "dangling pragma: no following statement in block");
        ++pos_;
        return s;
    }

    Stmt statement()
    {
        int line = cur().line, col = cur().col;
        Stmt s = statement_inner();
        s.line = line;
        s.col = col;
        return s;
    }

    // A nested statement position (loop/if body); pragmas there attach to the
    // following statement as well.
    Stmt sub_statement()
    {
        std::vector<Pragma> pending;
        while (cur().kind == TokKind::Pragma) {
            Pragma p = make_pragma(cur());
            if (p.family == PragmaFamily::Hmpp && is_standalone_hmpp(p.text))
                fail(p.line, p.col, "standalone directive must appear inside a block");
            pending.push_back(std::move(p));
            ++pos_;
        }
        if (!pending.empty() && is("}")) fail(pending.front().line, pending.front().col, "dangling pragma");
        Stmt s = statement();
        s.pragmas = std::move(pending);
        return s;
    }

    Stmt statement_inner()
    {
        reject_unsupported_keyword();
        if (is("{")) return compound();
        if (at_type()) {
            TypeSpec t = type_spec();
            Declarator head = declarator_head(false);
            return decl_rest(t, std::move(head));
        }
        if (cur().kind == TokKind::Ident && ahead(1).kind == TokKind::Punct && ahead(1).text == ":")
            fail(cur().line, cur().col, "unsupported construct 'label'");
        Stmt s;
        if (accept(";")) {
            s.kind = StmtKind::Empty;
            return s;
        }
        if (accept("if")) {
            s.kind = StmtKind::If;
            expect("(");
            s.expr = expression();
            expect(")");
            s.children.push_back(sub_statement());
            if (accept("else")) s.children.push_back(sub_statement());
            return s;
        }
        if (accept("while")) {
            s.kind = StmtKind::While;
            expect("(");
            s.expr = expression();
            expect(")");
            s.children.push_back(sub_statement());
            return s;
        }
        if (accept("for")) {
            s.kind = StmtKind::For;
            expect("(");
            Stmt init;
            init.line = cur().line;
            init.col = cur().col;
            if (accept(";")) {
                init.kind = StmtKind::Empty;
            } else if (at_type()) {
                TypeSpec t = type_spec();
                Declarator head = declarator_head(false);
                int l = init.line, c = init.col;
                init = decl_rest(t, std::move(head));
                init.line = l;
                init.col = c;
            } else {
                init.kind = StmtKind::Expr;
                init.expr = expression();
                expect(";");
            }
            s.children.push_back(std::move(init));
            if (!is(";")) s.expr = expression();
            expect(";");
            if (!is(")")) s.step = expression();
            expect(")");
            s.children.push_back(sub_statement());
            return s;
        }
        if (accept("return")) {
            s.kind = StmtKind::Return;
            if (!is(";")) s.expr = expression();
            expect(";");
            return s;
        }
        if (accept("break")) {
            s.kind = StmtKind::Break;
            expect(";");
            return s;
        }
        if (accept("continue")) {
            s.kind = StmtKind::Continue;
            expect(";");
            return s;
        }
        s.kind = StmtKind::Expr;
        s.expr = expression();
        expect(";");
        return s;
    }

    // ---- expressions -------------------------------------------------------

    Expr expression()
    {
        Expr e = assignment();
        if (is(",")) fail(cur().line, cur().col, "unsupported construct 'comma operator'");
        return e;
    }

    Expr assignment()
    {
        Expr lhs = conditional();
        static const std::set<std::string, std::less<>> ops = {"=",  "+=", "-=", "*=",  "/=",  "%=",
                                                               "&=", "|=", "^=", "<<=", ">>="};
        if (cur().kind == TokKind::Punct && ops.count(cur().text)) {
            Expr e;
            e.kind = ExprKind::Assign;
            e.text = cur().text;
            e.line = cur().line;
            e.col = cur().col;
            ++pos_;
            e.kids.push_back(std::move(lhs));
            e.kids.push_back(assignment());
            return e;
        }
        return lhs;
    }

    Expr conditional()
    {
        Expr c = binary(0);
        if (!is("?")) return c;
        Expr e;
        e.kind = ExprKind::Ternary;
        e.line = cur().line;
        e.col = cur().col;
        ++pos_;
        e.kids.push_back(std::move(c));
        e.kids.push_back(expression());
        expect(":");
        e.kids.push_back(conditional());
        return e;
    }

    static int precedence(const std::string& op)
    {
        static const std::map<std::string, int, std::less<>> p = {
            {"||", 1}, {"&&", 2}, {"|", 3},  {"^", 4},  {"&", 5},  {"==", 6}, {"!=", 6},
            {"<", 7},  {">", 7},  {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8}, {"+", 9},
            {"-", 9},  {"*", 10}, {"/", 10}, {"%", 10}};
        auto it = p.find(op);
        return it == p.end() ? -1 : it->second;
    }

    Expr binary(int min_prec)
    {
        Expr lhs = unary();
        for (;;) {
            if (cur().kind != TokKind::Punct) break;
            int p = precedence(cur().text);
            if (p < 0 || p <= min_prec) break;
            Expr e;
            e.kind = ExprKind::Binary;
            e.text = cur().text;
            e.line = cur().line;
            e.col = cur().col;
            ++pos_;
            e.kids.push_back(std::move(lhs));
            e.kids.push_back(binary(p));
            lhs = std::move(e);
        }
        return lhs;
    }

    bool at_cast() const
    {
        if (!is("(")) return false;
        const auto& t = ahead(1);
        if (t.kind != TokKind::Keyword) return false;
        return t.text == "int" || t.text == "float" || t.text == "double" || t.text == "char" ||
               t.text == "const" || t.text == "void";
    }

    Expr unary()
    {
        Expr e;
        e.line = cur().line;
        e.col = cur().col;
        if (cur().kind == TokKind::Keyword && cur().text == "sizeof")
            fail(cur().line, cur().col, "unsupported construct 'sizeof'");
        if (at_cast()) {
            ++pos_;
            TypeSpec t = type_spec();
            std::string spelling = t.spelling();
            while (accept("*")) spelling += "*";
            expect(")");
            e.kind = ExprKind::Cast;
            e.text = spelling;
            e.kids.push_back(unary());
            return e;
        }
        if (cur().kind == TokKind::Punct &&
            (is("+") || is("-") || is("!") || is("~") || is("*") || is("&") || is("++") || is("--"))) {
            e.kind = ExprKind::Unary;
            e.text = cur().text;
            ++pos_;
            e.kids.push_back(unary());
            return e;
        }
        return postfix();
    }

    Expr postfix()
    {
        Expr e = primary();
        for (;;) {
            if (is("[")) {
                Expr ix;
                ix.kind = ExprKind::Index;
                ix.line = cur().line;
                ix.col = cur().col;
                ++pos_;
                ix.kids.push_back(std::move(e));
                ix.kids.push_back(expression());
                expect("]");
                e = std::move(ix);
            } else if (is("(")) {
                if (e.kind != ExprKind::Ident) error("only direct calls by name are supported");
                Expr call;
                call.kind = ExprKind::Call;
                call.text = e.text;
                call.line = e.line;
                call.col = e.col;
                ++pos_;
                if (!is(")")) {
                    do call.kids.push_back(assignment());
                    while (accept(","));
                }
                expect(")");
                e = std::move(call);
            } else if (is("++") || is("--")) {
                Expr p;
                p.kind = ExprKind::Postfix;
                p.text = cur().text;
                p.line = cur().line;
                p.col = cur().col;
                ++pos_;
                p.kids.push_back(std::move(e));
                e = std::move(p);
            } else if (is(".") || is("->")) {
                fail(cur().line, cur().col, "unsupported construct 'member access'");
            } else {
                break;
            }
        }
        return e;
    }

    Expr primary()
    {
        Expr e;
        e.line = cur().line;
        e.col = cur().col;
        e.text = cur().text;
        switch (cur().kind) {
        case TokKind::Ident: e.kind = ExprKind::Ident; break;
        case TokKind::IntLit: e.kind = ExprKind::IntLit; break;
        case TokKind::FloatLit: e.kind = ExprKind::FloatLit; break;
        case TokKind::StrLit: e.kind = ExprKind::StrLit; break;
        case TokKind::CharLit: e.kind = ExprKind::CharLit; break;
        case TokKind::Punct:
            if (is("(")) {
                ++pos_;
                e.kind = ExprKind::Paren;
                e.text.clear();
                e.kids.push_back(expression());
                expect(")");
                return e;
            }
            error("expected expression");
        case TokKind::Pragma:
            fail(cur().line, cur().col, "pragma inside an expression");
        default:
            reject_unsupported_keyword();
            error("expected expression");
        }
        ++pos_;
        // Adjacent string literals concatenate.
        while (e.kind == ExprKind::StrLit && cur().kind == TokKind::StrLit) {
            e.text += " " + cur().text;
            ++pos_;
        }
        return e;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// ---- scope checking --------------------------------------------------------

class ScopeChecker {
  public:
    explicit ScopeChecker(const SourceUnit& u) : unit_(u) {}

    void run()
    {
        scopes_.emplace_back();
        for (const auto& it : unit_.items) {
            if (it.kind == TopItem::Kind::Global) {
                stmt(it.global);
            } else {
                functions_.insert(it.fn.name);
                if (scopes_.front().count(it.fn.name))
                    fail(it.fn.line, it.fn.col, "'" + it.fn.name + "' redeclared as a function");
                if (!it.fn.body) continue;
                scopes_.emplace_back();
                for (const auto& p : it.fn.params) {
                    for (const auto& d : p.decl.dims)
                        if (d) expr(*d);
                    if (!p.decl.name.empty()) declare(p.decl);
                }
                // The body compound shares the parameter scope.
                for (const auto& c : it.fn.body->children) stmt(c);
                scopes_.pop_back();
            }
        }
    }

  private:
    void declare(const Declarator& d)
    {
        auto& top = scopes_.back();
        if (top.count(d.name)) fail(d.line, d.col, "redeclaration of '" + d.name + "'");
        if (scopes_.size() == 1 && functions_.count(d.name))
            fail(d.line, d.col, "'" + d.name + "' redeclared as a variable");
        top.insert(d.name);
    }

    bool declared(const std::string& n) const
    {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
            if (it->count(n)) return true;
        return false;
    }

    void expr(const Expr& e)
    {
        if (e.kind == ExprKind::Ident && !declared(e.text)) {
            if (functions_.count(e.text)) fail(e.line, e.col, "function '" + e.text + "' used as a value");
            fail(e.line, e.col, "use of undeclared identifier '" + e.text + "'");
        }
        if (e.kind == ExprKind::Call && declared(e.text) && !functions_.count(e.text))
            fail(e.line, e.col, "'" + e.text + "' is not a function");
        for (const auto& k : e.kids) expr(k);
    }

    void stmt(const Stmt& s)
    {
        switch (s.kind) {
        case StmtKind::Compound:
            scopes_.emplace_back();
            for (const auto& c : s.children) stmt(c);
            scopes_.pop_back();
            return;
        case StmtKind::Decl:
            for (const auto& d : s.decls) {
                for (const auto& dim : d.dims)
                    if (dim) expr(*dim);
                declare(d);
                if (d.init) expr(*d.init);
            }
            return;
        case StmtKind::For:
            scopes_.emplace_back();
            stmt(s.children[0]);
            if (s.expr) expr(*s.expr);
            if (s.step) expr(*s.step);
            stmt(s.children[1]);
            scopes_.pop_back();
            return;
        default:
            if (s.expr) expr(*s.expr);
            for (const auto& c : s.children) stmt(c);
            return;
        }
    }

    const SourceUnit& unit_;
    std::vector<std::set<std::string>> scopes_;
    std::set<std::string> functions_;
};

} // namespace

SourceUnit parse_translation_unit(std::string_view text, std::string file)
{
    try {
        SourceUnit u = Parser(tokenize(text)).unit();
        u.file = file;
        ScopeChecker(u).run();
        number_statements(u);
        return u;
    } catch (CompileError& e) {
        auto ds = e.diagnostics();
        for (auto& d : ds) d.file = file;
        throw CompileError(std::move(ds));
    }
}

} // namespace omp2hmpp
