#include "omp2hmpp/cfront.hpp"

#include <cctype>
#include <cstring>
#include <regex>
#include <set>

namespace omp2hmpp {

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "int",   "float",  "double",  "void",     "char",    "const",  "if",     "else",
    "for",   "while",  "return",  "break",    "continue", "goto",  "switch", "case",
    "default", "do",   "struct",  "union",    "enum",    "typedef", "static", "extern",
    "unsigned", "signed", "long", "short",    "sizeof",  "register", "volatile", "inline",
    "auto",  "restrict"};

// Longest first so greedy matching works.
const char* const kPuncts[] = {"<<=", ">>=", "...", "++", "--", "+=", "-=", "*=", "/=", "%=",
                               "&=",  "|=",  "^=",  "==", "!=", "<=", ">=", "&&", "||", "<<",
                               ">>",  "->",  "+",   "-",  "*",  "/",  "%",  "=",  "<",  ">",
                               "!",   "~",   "&",   "|",  "^",  "?",  ":",  ";",  ",",  ".",
                               "(",   ")",   "[",   "]",  "{",  "}"};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        bool line_start = true;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                advance();
                line_start = true;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                int l = line_, cl = col_;
                advance();
                advance();
                while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
                if (pos_ >= src_.size()) fail(l, cl, "unterminated comment");
                advance();
                advance();
                continue;
            }
            if (c == '#') {
                if (!line_start) fail(line_, col_, "stray '#' in program");
                if (auto t = directive()) out.push_back(std::move(*t));
                line_start = true;
                continue;
            }
            line_start = false;
            out.push_back(token());
        }
        Token end;
        end.kind = TokKind::End;
        end.line = line_;
        end.col = col_;
        out.push_back(end);
        return out;
    }

  private:
    char peek(std::size_t off) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

    void advance()
    {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    // Reads one physical line (without the newline), honouring backslash
    // continuations.
    std::string read_line()
    {
        std::string s;
        while (pos_ < src_.size() && src_[pos_] != '\n') {
            if (src_[pos_] == '\\' && peek(1) == '\n') {
                advance();
                advance();
                s += ' ';
                continue;
            }
            s += src_[pos_];
            advance();
        }
        return s;
    }

    static std::string trim(std::string s)
    {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::optional<Token> directive()
    {
        int l = line_, cl = col_;
        std::string line = trim(read_line().substr(1));
        if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) return std::nullopt; // cpp line marker
        if (line.rfind("line", 0) == 0) return std::nullopt;
        if (line.rfind("pragma", 0) != 0) {
            std::string word = line.substr(0, line.find_first_of(" \t<\""));
            fail(l, cl, "unsupported construct: preprocessor directive '#" + word +
                            "' (run an external preprocessor such as `cpp -P` first)");
        }
        std::string text = trim(line.substr(6));
        // HMPP continuation: trailing '&' joined with a following `#pragma hmpp &` line.
        while (!text.empty() && text.back() == '&') {
            std::size_t save_pos = pos_;
            int save_line = line_, save_col = col_;
            if (pos_ < src_.size()) advance(); // newline
            while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) advance();
            std::string next = pos_ < src_.size() && src_[pos_] == '#' ? trim(read_line().substr(1)) : "";
            static const std::regex cont(R"(^pragma\s+(hmpp|hmppcg|hmpc|hmpcpg)\s*&\s*(.*)$)");
            std::smatch m;
            if (!std::regex_match(next, m, cont)) {
                pos_ = save_pos;
                line_ = save_line;
                col_ = save_col;
                break;
            }
            text.pop_back();
            text = trim(text) + " " + trim(m[2].str());
        }
        Token t;
        t.kind = TokKind::Pragma;
        t.text = canonicalize_pragma_text(text);
        t.line = l;
        t.col = cl;
        return t;
    }

    Token token()
    {
        Token t;
        t.line = line_;
        t.col = col_;
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
                t.text += src_[pos_];
                advance();
            }
            t.kind = kKeywords.count(t.text) ? TokKind::Keyword : TokKind::Ident;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            bool is_float = false;
            if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
                t.text += src_[pos_];
                advance();
                t.text += src_[pos_];
                advance();
                while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
                    t.text += src_[pos_];
                    advance();
                }
            } else {
                while (pos_ < src_.size()) {
                    char d = src_[pos_];
                    if (std::isdigit(static_cast<unsigned char>(d))) {
                    } else if (d == '.') {
                        is_float = true;
                    } else if ((d == 'e' || d == 'E') &&
                               (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                                ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
                        is_float = true;
                        t.text += d;
                        advance();
                        d = src_[pos_];
                    } else {
                        break;
                    }
                    t.text += d;
                    advance();
                }
            }
            while (pos_ < src_.size() && std::strchr("uUlLfF", src_[pos_])) {
                if (src_[pos_] == 'f' || src_[pos_] == 'F') is_float = true;
                t.text += src_[pos_];
                advance();
            }
            t.kind = is_float ? TokKind::FloatLit : TokKind::IntLit;
            return t;
        }
        if (c == '"' || c == '\'') {
            char q = c;
            t.text += c;
            advance();
            while (pos_ < src_.size() && src_[pos_] != q) {
                if (src_[pos_] == '\n') fail(t.line, t.col, "unterminated literal");
                if (src_[pos_] == '\\') {
                    t.text += src_[pos_];
                    advance();
                }
                t.text += src_[pos_];
                advance();
            }
            if (pos_ >= src_.size()) fail(t.line, t.col, "unterminated literal");
            t.text += q;
            advance();
            t.kind = q == '"' ? TokKind::StrLit : TokKind::CharLit;
            return t;
        }
        for (const char* p : kPuncts) {
            std::string_view pv(p);
            if (src_.substr(pos_, pv.size()) == pv) {
                t.text = std::string(pv);
                for (std::size_t i = 0; i < pv.size(); ++i) advance();
                t.kind = TokKind::Punct;
                return t;
            }
        }
        fail(line_, col_, std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

} // namespace

std::string canonicalize_pragma_text(std::string_view text)
{
    static const std::regex hmpc(R"(^hmpc(\s|$))");
    static const std::regex hmpcpg(R"(^hmpcpg(\s|$))");
    static const std::regex delegat(R"(\bdelegatstore\b)");
    std::string s(text);
    s = std::regex_replace(s, hmpcpg, "hmppcg$1");
    s = std::regex_replace(s, hmpc, "hmpp$1");
    s = std::regex_replace(s, delegat, "delegatedstore");
    return s;
}

std::vector<Token> tokenize(std::string_view text)
{
    return Lexer(text).run();
}

std::vector<std::string> token_spellings(std::string_view text)
{
    std::vector<std::string> out;
    for (const auto& t : tokenize(text)) {
        if (t.kind == TokKind::End) break;
        if (t.kind == TokKind::Pragma) {
            out.push_back("#pragma");
            for (const auto& inner : tokenize(t.text)) {
                if (inner.kind == TokKind::End) break;
                out.push_back(inner.text);
            }
            continue;
        }
        out.push_back(t.text);
    }
    return out;
}

} // namespace omp2hmpp
