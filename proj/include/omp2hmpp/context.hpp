#pragma once

// Context analysis: who reads and writes what, where, on which side; and the
// placement of the HMPP transfer directives derived from it.

#include "omp2hmpp/ast.hpp"
#include "omp2hmpp/variants.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace omp2hmpp {

enum class AccessKind { Read, Write };

struct Access {
    std::string symbol;
    AccessKind kind = AccessKind::Read;
};

/// Read/write effects of expressions and statements in execution order.
/// Compound assignments give a read then a write; `&x` counts as both.
/// Calls to functions defined in the unit use their summarized effects on
/// array parameters and globals; other calls read their array arguments.
class AccessScanner {
  public:
    explicit AccessScanner(const SourceUnit& unit);

    std::vector<Access> expr(const Expr& e) const;
    /// The whole statement, children included.
    std::vector<Access> stmt(const Stmt& s) const;

    /// Symbols used in ways name-identity analysis cannot follow: address
    /// taken outside a call argument, or an array used as a plain value.
    std::set<std::string> unanalyzable(const Stmt& s) const;

  private:
    struct Summary {
        std::vector<bool> param_read, param_written;
        std::set<std::string> global_reads, global_writes;
    };
    void expr_into(const Expr& e, std::vector<Access>& out) const;
    void lvalue_into(const Expr& e, bool read_too, std::vector<Access>& out) const;
    void stmt_into(const Stmt& s, std::vector<Access>& out) const;
    const Summary* summary(const std::string& fn) const;

    const SourceUnit& unit_;
    std::map<std::string, Summary> summaries_;
};

enum class Host { Cpu, Gpu };

struct AccessEvent {
    std::string symbol;
    AccessKind kind = AccessKind::Read;
    int site = -1; // statement id (the kernel's block id for GPU events)
    Host host = Host::Cpu;
    int kernel = -1;              // block id when host == Gpu
    std::vector<int> loop_path;   // enclosing loop ids, outermost first
};

struct ContextTable {
    std::map<std::string, std::vector<AccessEvent>> events; // sorted by site
    std::set<int> kernels;

    std::string dump() const;
};

/// Events for every symbol of `fn` at top-level statement granularity below
/// loops: each maximal statement that is not a loop, compound or if gives
/// events at its own id; kernel statements give GPU events.
ContextTable build_context_table(const SourceUnit& unit, const FunctionDef& fn, const std::set<int>& kernels);

/// in / out / inout from the kernel's own access sequence: never written ->
/// in, never read -> out, otherwise inout.
std::string infer_io_direction(const std::string& symbol, const std::vector<Access>& kernel_accesses);

/// A gap in a statement list: before element `index` of compound `list`
/// (index == size means at its end).
struct Gap {
    int list = -1;
    int index = 0;

    auto operator<=>(const Gap&) const = default;
};

/// One kernel as context analysis sees it.
struct KernelInfo {
    int block = -1; // statement id of the block (and of its callsite)
    std::string label;
    std::string group; // empty when not grouped
    FlagSet flags;
    std::vector<std::string> order;   // host symbols in parameter order
    std::vector<std::string> inputs;  // arrays the codelet declares in/inout
    std::vector<std::string> outputs; // arrays written by the kernel, then reduced scalars
    std::set<std::string> arrays;
    std::set<std::string> reduced;    // host scalars behind `<v>_reduced`
    std::map<std::string, std::string> arg_of; // host symbol -> codelet param name
    std::set<std::string> uses;                // every host symbol passed

    bool is_array(const std::string& s) const { return arrays.count(s) > 0; }
    const std::set<std::string>& reduced_outputs() const { return reduced; }
};

enum class DirectiveKind { Group, Mapbyname, Synchronize, Delegatedstore, Release, Advancedload };

struct PlacedDirective {
    DirectiveKind kind = DirectiveKind::Advancedload;
    Gap gap;
    std::string context;  // group name or codelet label
    std::string label;    // codelet label naming the directive (empty for group/mapbyname/release of a group)
    std::vector<std::string> symbols; // host symbols
    int kernel = -1;
};

struct TransferPlan {
    std::vector<PlacedDirective> directives;          // sorted by gap, then kind
    std::map<int, std::set<std::string>> noupdate;    // kernel -> host symbols
    std::set<int> async;
    std::set<std::string> fallback;                   // symbols left to callsite transfers

    std::string dump() const;
};

/// Gap right after the last host write of `symbol` before `kernel`, with loop
/// backtracking. `host_writer` decides which statements count as writes.
Gap last_cpu_write_site(const FunctionDef& fn, int kernel, const std::string& symbol,
                        const std::function<bool(const Stmt&)>& host_writer);

/// Gap right before the first host access of `symbol` after `kernel`;
/// nullopt when the value is dead.
std::optional<Gap> first_cpu_read_site(const FunctionDef& fn, int kernel,
                                       const std::function<bool(const Stmt&)>& host_access,
                                       const std::function<bool(const Gap&)>& gap_access, bool escapes);

/// Placement of every transfer directive for the kernels of `fn`. `fn` is
/// the function before outlining, bodies of loops and ifs already compound.
TransferPlan build_transfer_plan(const SourceUnit& unit, const FunctionDef& fn, const std::vector<KernelInfo>& kernels);

} // namespace omp2hmpp
