#pragma once

// Rendering of one variant: a unit plus per-block flags in, compilable C with
// HMPP directives out.

#include "omp2hmpp/ast.hpp"
#include "omp2hmpp/context.hpp"
#include "omp2hmpp/transform.hpp"
#include "omp2hmpp/variants.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace omp2hmpp {

struct RenderedVariant {
    std::string name;
    std::string signature; // UnitVariant::signature_text()
    std::string suffix;    // file name part, "a_b_c[__a_b_c...]"
    std::string source;
    /// Directive keyword -> occurrences in `source`.
    std::map<std::string, int> manifest;
    std::vector<std::string> codelets;
    std::vector<std::string> groups;
    std::vector<std::string> inlined; // functions whose bodies were removed
};

/// Candidate blocks of the unit as plans_for_unit wants them. A block is
/// group-eligible when it shares an array with another candidate of the
/// same function.
std::vector<BlockChoice> block_choices(const SourceUnit& unit);

RenderedVariant emit_variant(const SourceUnit& unit, const UnitVariant& variant);

/// Every variant of the unit, in plans_for_unit order.
std::vector<RenderedVariant> emit_all(const SourceUnit& unit, std::size_t cap = kDefaultVariantCap);

/// The variant where every candidate block has `flags`.
UnitVariant uniform_variant(const SourceUnit& unit, const FlagSet& flags);

/// Occurrences of each HMPP directive keyword on `#pragma hmpp`/`hmppcg`
/// lines of `text` (continuation lines included).
std::map<std::string, int> count_directives(const std::string& text);

/// Writes `<stem>__<suffix>.c` per variant plus `manifest.txt` with one
/// `name<TAB>signature<TAB>file` line each. Returns the written paths.
std::vector<std::filesystem::path> write_variants(const std::filesystem::path& dir, const std::string& stem,
                                                  const std::vector<RenderedVariant>& variants);

struct ManifestEntry {
    std::string name;
    std::string signature;
    std::string file;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& file);

} // namespace omp2hmpp
