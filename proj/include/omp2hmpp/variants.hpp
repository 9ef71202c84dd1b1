#pragma once

// Directive configurations for one block, their three-integer signatures, and
// the cross product that turns a unit's check/fixed blocks into variants.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace omp2hmpp {

struct FlagSet {
    bool baseline = false; // leave the block as OpenMP
    bool advancedload = false;
    bool release = false;
    bool asynchronous = false;
    bool noupdate = false;
    bool delegatedstore = false;
    bool group = false;

    bool plain() const
    {
        return !baseline && !advancedload && !release && !asynchronous && !noupdate && !delegatedstore && !group;
    }
    bool operator==(const FlagSet&) const = default;
};

struct Signature {
    unsigned a = 0, b = 0, c = 0;

    std::string str() const; // "a, b, c"
    auto operator<=>(const Signature&) const = default;
};

/// Empty when the flags are realizable, otherwise the violated rule.
std::optional<std::string> flag_violation(const FlagSet& f);

Signature encode_signature(const FlagSet& f);
FlagSet decode_signature(const Signature& s);

/// Table-8 style name: "Original(OpenMP)", "Codelet", or the flag words
/// (Adv_load, Rel, Async, delStore, NoUpdate, Group) concatenated.
std::string flag_name(const FlagSet& f);

struct VariantPlan {
    int block = -1;
    FlagSet flags;
};

/// Every feasible configuration of a check block, baseline included, in
/// ascending signature order. `group_eligible` offers group=true as well.
std::vector<VariantPlan> enumerate_variants(int block, bool group_eligible);

/// What plans_for_unit needs to know about one candidate block.
struct BlockChoice {
    int block = -1;
    bool check = false;
    std::optional<std::array<unsigned, 3>> fixed;
    bool group_eligible = false;
};

struct UnitVariant {
    std::string name;
    /// Signatures of the blocks that vary (the check blocks; the fixed blocks
    /// when nothing is checked), in block order.
    std::vector<Signature> signature;
    /// One entry per candidate block, in block order.
    std::vector<VariantPlan> plans;

    const FlagSet* flags_for(int block) const;
    std::string signature_text() const; // "a, b, c" joined with " | "
    std::string file_suffix() const;   // "a_b_c" joined with "__"
};

constexpr std::size_t kDefaultVariantCap = 512;

/// Cross product over check blocks, fixed blocks pinned. Throws CompileError
/// when the product exceeds `cap`.
std::vector<UnitVariant> plans_for_unit(const std::vector<BlockChoice>& blocks, std::size_t cap = kDefaultVariantCap);

} // namespace omp2hmpp
