#pragma once

// The two directive vocabularies: OpenMP (input, extended with the `check`
// and `fixed(a, b, c)` clauses) and HMPP (output).

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace omp2hmpp {

enum class OmpKind { Parallel, ParallelFor, For, None };

struct Reduction {
    std::string op; // + * - min max
    std::string var;

    bool operator==(const Reduction&) const = default;
};

struct OmpPragma {
    OmpKind kind = OmpKind::None;
    std::vector<std::string> shared;
    std::vector<std::string> privates;
    std::optional<Reduction> reduction;
    bool check = false;
    std::optional<std::array<unsigned, 3>> fixed;
    /// Clauses carried through untouched (schedule, nowait, ...), verbatim.
    std::vector<std::string> other;
    /// Construct words for kind None (`critical`, `barrier`, ...).
    std::string construct;

    bool operator==(const OmpPragma&) const = default;
};

/// Parses the text after `#pragma` (it must start with `omp`).
OmpPragma parse_omp_pragma(std::string_view text);

/// Canonical `omp ...` text; the tool-only clauses check/fixed are never
/// rendered.
std::string render_omp(const OmpPragma& p);

/// `text` with the check and fixed clauses removed, all other tokens kept in
/// their original order.
std::string omp_text_without_tool_clauses(std::string_view text);

enum class HmppKind {
    Codelet,
    Callsite,
    Group,
    Mapbyname,
    Advancedload,
    Delegatedstore,
    Synchronize,
    Release,
    Gridify // hmppcg
};

std::string_view hmpp_kind_name(HmppKind k);

struct HmppArg {
    std::string name;
    std::optional<std::string> io; // in / out / inout
    std::optional<std::string> size;
    std::optional<std::string> addr;
    bool noupdate = false;
    bool listed = false; // bare `args[x]` in a load/store

    bool operator==(const HmppArg&) const = default;
};

struct HmppDirective {
    HmppKind kind = HmppKind::Codelet;
    std::string group; // without angle brackets; empty when absent
    std::string label;
    bool target_cuda = false;
    bool transfer_auto = false;
    bool asynchronous = false;
    std::vector<HmppArg> args;
    std::vector<std::string> mapped;
    std::vector<std::string> gridify;
    std::optional<Reduction> reduce;

    HmppArg& arg(const std::string& name);
    const HmppArg* find_arg(const std::string& name) const;

    bool operator==(const HmppDirective&) const = default;
};

/// Parses the text after `#pragma` (it must start with `hmpp` or `hmppcg`).
HmppDirective parse_hmpp_directive(std::string_view text);

/// Canonical single-line text (without `#pragma `), args with identical
/// properties coalesced.
std::string render_directive_text(const HmppDirective& d);

/// `#pragma` lines for a directive, continued with `&` past the width limit.
std::vector<std::string> render_directive(const HmppDirective& d);

constexpr std::size_t kPragmaWidth = 100;

/// Splits a pragma's text into `#pragma` lines. HMPP pragmas longer than the
/// width limit continue with a trailing `&` and a leading `#pragma hmpp &`.
std::vector<std::string> wrap_pragma_text(std::string_view text);

/// Order-insensitive comparison over args (render coalescing reorders them).
bool equivalent(const HmppDirective& a, const HmppDirective& b);

} // namespace omp2hmpp
