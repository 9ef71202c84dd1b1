#pragma once

// Outline phase (OpenMP block -> codelet + callsite) and inline phase (calls
// in kernel paths replaced by renamed copies of the callee).

#include "omp2hmpp/ast.hpp"
#include "omp2hmpp/diagnostic.hpp"
#include "omp2hmpp/directives.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace omp2hmpp {

struct OmpBlock {
    int index = -1; // position in the find_omp_blocks result
    std::string function;
    int stmt_id = -1; // the statement the pragma is attached to
    int line = 0;     // line of the pragma
    OmpPragma omp;
    int region = -1;              // enclosing `omp parallel` region (index), -1 if none
    std::vector<int> sub_blocks;  // for a region: its `omp for` blocks
    bool check = false;           // own clause, or inherited from the region
    std::optional<std::array<unsigned, 3>> fixed;

    bool is_region() const { return omp.kind == OmpKind::Parallel; }
    /// A loop block the tool may move to the accelerator.
    bool candidate() const { return !is_region() && omp.kind != OmpKind::None && (check || fixed); }
};

/// Every OpenMP pragma attached to a statement, in source order. `omp for`
/// blocks inside an `omp parallel` region are listed as its sub-blocks.
std::vector<OmpBlock> find_omp_blocks(const SourceUnit& unit);

enum class Storage { Global, Param, Local };

struct Symbol {
    std::string name;
    TypeSpec type;
    Declarator decl;
    Storage storage = Storage::Local;

    int rank() const { return static_cast<int>(decl.dims.size()) + decl.pointer; }
};

/// Symbols visible at statement `stmt_id` of `fn` (inner scopes shadow
/// outer ones). Function parameters and globals included.
std::map<std::string, Symbol> visible_symbols(const SourceUnit& unit, const FunctionDef& fn, int stmt_id);

const FunctionDef* function_containing(const SourceUnit& unit, int stmt_id);

struct CodeletParam {
    enum class Kind { Scalar, Array, Reduced };
    Kind kind = Kind::Scalar;
    std::string name;     // inside the codelet
    std::string arg;      // callsite argument text
    std::string symbol;   // host symbol it stands for
    TypeSpec type;
    Declarator decl;      // as written in the codelet signature
    std::string io;       // in/out/inout; empty for by-value scalars
    std::optional<std::string> size;
};

struct CodeletDef {
    std::string label;
    std::string group; // empty unless grouped
    std::string function;
    int block = -1;
    std::vector<CodeletParam> params;
    Stmt body; // compound
    std::vector<std::string> gridify;
    std::optional<Reduction> reduce;

    const CodeletParam* param_for(const std::string& symbol) const;
    FunctionDef to_function() const;
};

/// `_instr_for<region>_ol_<line>_<function>`.
std::string codelet_label(int region_line, int line, const std::string& function);

/// Free variables of the block in first-use order, dimension symbols ahead of
/// the arrays they size. Throws on shapes the outliner cannot pass.
std::vector<CodeletParam> infer_codelet_params(const SourceUnit& unit, const FunctionDef& fn, const Stmt& block,
                                               const OmpPragma& omp);

/// Grid dimensions for the loop nest: (i, j), (1, j) under a reduction, or
/// (i). Empty when the statement is not a `for`.
std::vector<std::string> gridify_spec(const Stmt& block, bool reduction);

/// Induction variable of a `for` (`i` in `for (i = 0; ...)`), empty if none.
std::string loop_variable(const Stmt& loop);

struct ReductionFragments {
    CodeletParam param;
    Stmt prologue;
    Stmt epilogue;
};

/// Pointer parameter `<v>_reduced`, the local copy and the write-back.
ReductionFragments transform_reduction(const Symbol& var, const Reduction& r);

struct Outlined {
    CodeletDef codelet;
    Stmt callsite; // expression statement, id = the block's id
    SourceUnit unit;
};

/// Moves the block into a codelet placed before its function and replaces
/// it with a call. Directives are left to the caller. `params`, when given,
/// replaces inference (callers outlining several blocks infer them all on the
/// untouched unit first).
Outlined outline_block(const SourceUnit& unit, const OmpBlock& block, const std::string& label,
                       const std::vector<CodeletParam>* params = nullptr);

struct InlineReport {
    std::vector<std::string> inlined;  // functions with at least one call inlined, first-inline order
    std::vector<std::string> removed;  // fully inlined, body deleted, marker emitted
    int calls = 0;                     // next fresh index y
    std::vector<std::string> markers;
};

struct InlineOptions {
    /// Functions to inline; empty means every defined function except main.
    std::set<std::string> functions;
    /// When set, only calls inside these statements are inlined.
    std::optional<std::set<int>> within;
};

std::pair<SourceUnit, InlineReport> inline_calls(const SourceUnit& unit, const InlineOptions& opts = {});

/// Hoists each call of an expression statement (declaration initializer,
/// return or if condition) into `T _return_<y> = f(...);` captures, inner
/// calls first, then left to right. The last element is the recombined
/// statement, dropped when it would be a bare `_return_<y>;`. `next` is the
/// fresh index, advanced by the number of calls. `callees` empty means every
/// function defined in `unit`.
std::vector<Stmt> split_multi_call_expr(const Stmt& stmt, int& next, const SourceUnit& unit,
                                        const std::set<std::string>& callees = {});

/// Identifiers in the codelet body that are neither params nor body locals,
/// and calls the accelerator cannot make.
std::vector<Diagnostic> check_global_scope(const CodeletDef& codelet, const SourceUnit& unit);

/// Math routines a codelet may call directly.
bool is_device_intrinsic(const std::string& name);

} // namespace omp2hmpp
