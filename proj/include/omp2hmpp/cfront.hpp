#pragma once

// Front end for the supported C subset: lexing, parsing, printing and pragma
// erasure. Input must already be preprocessed; only `#pragma` lines (and cpp
// line markers, which are skipped) may remain.

#include "omp2hmpp/ast.hpp"
#include "omp2hmpp/diagnostic.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace omp2hmpp {

enum class TokKind { Ident, Keyword, IntLit, FloatLit, StrLit, CharLit, Punct, Pragma, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    int line = 0;
    int col = 0;
};

/// Splits `text` into tokens. Pragma lines become a single Pragma token whose
/// text is everything after `#pragma` with continuations joined.
std::vector<Token> tokenize(std::string_view text);

/// Tokens of `text` with each pragma expanded into its own word tokens, for
/// token-equivalence comparisons between two renderings of a program.
std::vector<std::string> token_spellings(std::string_view text);

SourceUnit parse_translation_unit(std::string_view text, std::string file = "<input>");

/// Canonical C rendering of a unit.
std::string print_unit(const SourceUnit& unit);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_expr(const Expr& e);
std::string print_function(const FunctionDef& fn);

/// Removes every attached pragma and every standalone directive statement.
SourceUnit strip_pragmas(SourceUnit unit);

/// Count of attached pragmas plus standalone directives.
std::size_t count_pragmas(const SourceUnit& unit);

/// Maps the spelling variants found in the wild onto `hmpp`, `hmppcg` and
/// `delegatedstore`.
std::string canonicalize_pragma_text(std::string_view text);

} // namespace omp2hmpp
