#include "omp2hmpp/variants.hpp"
#include "omp2hmpp/diagnostic.hpp"

#include <algorithm>

namespace omp2hmpp {

std::string Signature::str() const
{
    return std::to_string(a) + ", " + std::to_string(b) + ", " + std::to_string(c);
}

std::optional<std::string> flag_violation(const FlagSet& f)
{
    if (f.baseline) {
        FlagSet only;
        only.baseline = true;
        if (!(f == only)) return "baseline excludes every other flag";
        return std::nullopt;
    }
    if (f.noupdate && !f.advancedload) return "noupdate requires advancedload";
    if (f.asynchronous && !(f.advancedload || f.delegatedstore))
        return "asynchronous requires advancedload or delegatedstore";
    if (f.release && !(f.advancedload || f.delegatedstore)) return "release requires advancedload or delegatedstore";
    return std::nullopt;
}

Signature encode_signature(const FlagSet& f)
{
    if (auto v = flag_violation(f)) throw CompileError(Diagnostic{"", 0, 0, "invalid flag set: " + *v});
    if (f.baseline) return {0, 0, 0};
    Signature s;
    s.a = (f.noupdate ? 1u : 0u) | (f.release ? 2u : 0u) | (f.asynchronous ? 4u : 0u) | (f.advancedload ? 8u : 0u);
    s.b = (f.delegatedstore ? 1u : 0u) | (f.group ? 2u : 0u);
    s.c = (s.a == 0 && s.b == 0) ? 1u : 0u;
    return s;
}

FlagSet decode_signature(const Signature& s)
{
    auto bad = [&](const std::string& why) -> CompileError {
        return CompileError(Diagnostic{"", 0, 0, "infeasible signature (" + s.str() + "): " + why});
    };
    if (s.a >= 16 || s.b >= 4 || s.c >= 2) throw bad("field out of range (a < 16, b < 4, c < 2)");
    FlagSet f;
    if (s.a == 0 && s.b == 0) {
        if (s.c == 0) f.baseline = true;
        return f; // c == 1: plain codelet
    }
    if (s.c != 0) throw bad("third word is 1 only for the plain codelet");
    f.noupdate = s.a & 1u;
    f.release = s.a & 2u;
    f.asynchronous = s.a & 4u;
    f.advancedload = s.a & 8u;
    f.delegatedstore = s.b & 1u;
    f.group = s.b & 2u;
    if (auto v = flag_violation(f)) throw bad(*v);
    return f;
}

std::string flag_name(const FlagSet& f)
{
    if (f.baseline) return "Original(OpenMP)";
    if (f.plain()) return "Codelet";
    std::string n;
    if (f.advancedload) n += "Adv_load";
    if (f.release) n += "Rel";
    if (f.asynchronous) n += "Async";
    if (f.delegatedstore) n += "delStore";
    if (f.noupdate) n += "NoUpdate";
    if (f.group) n += "Group";
    return n;
}

std::vector<VariantPlan> enumerate_variants(int block, bool group_eligible)
{
    std::vector<std::pair<Signature, FlagSet>> found;
    for (unsigned bits = 0; bits < 64; ++bits) {
        FlagSet f;
        f.advancedload = bits & 1u;
        f.release = bits & 2u;
        f.asynchronous = bits & 4u;
        f.noupdate = bits & 8u;
        f.delegatedstore = bits & 16u;
        f.group = bits & 32u;
        if (f.group && !group_eligible) continue;
        if (flag_violation(f)) continue;
        found.emplace_back(encode_signature(f), f);
    }
    FlagSet base;
    base.baseline = true;
    found.emplace_back(Signature{0, 0, 0}, base);
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<VariantPlan> out;
    for (const auto& [sig, f] : found) out.push_back({block, f});
    return out;
}

const FlagSet* UnitVariant::flags_for(int block) const
{
    for (const auto& p : plans)
        if (p.block == block) return &p.flags;
    return nullptr;
}

std::string UnitVariant::signature_text() const
{
    std::string s;
    for (std::size_t i = 0; i < signature.size(); ++i) s += (i ? " | " : "") + signature[i].str();
    return s;
}

std::string UnitVariant::file_suffix() const
{
    std::string s;
    for (std::size_t i = 0; i < signature.size(); ++i) {
        if (i) s += "__";
        s += std::to_string(signature[i].a) + "_" + std::to_string(signature[i].b) + "_" +
             std::to_string(signature[i].c);
    }
    return s;
}

std::vector<UnitVariant> plans_for_unit(const std::vector<BlockChoice>& blocks, std::size_t cap)
{
    bool any_check = std::any_of(blocks.begin(), blocks.end(), [](const BlockChoice& b) { return b.check; });

    std::vector<std::vector<VariantPlan>> lists;
    std::vector<bool> varies;
    std::size_t total = 1;
    for (const auto& b : blocks) {
        if (b.check) {
            lists.push_back(enumerate_variants(b.block, b.group_eligible));
        } else if (b.fixed) {
            FlagSet f = decode_signature(Signature{(*b.fixed)[0], (*b.fixed)[1], (*b.fixed)[2]});
            lists.push_back({VariantPlan{b.block, f}});
        } else {
            FlagSet f;
            f.baseline = true;
            lists.push_back({VariantPlan{b.block, f}});
        }
        varies.push_back(any_check ? b.check : b.fixed.has_value());
        total *= lists.back().size();
        if (total > cap)
            throw CompileError(Diagnostic{"", 0, 0,
                                          "variant count exceeds the cap of " + std::to_string(cap) +
                                              "; pin some blocks with fixed(a, b, c) instead of check"});
    }

    std::vector<UnitVariant> out;
    std::vector<std::size_t> idx(lists.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        UnitVariant v;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < lists.size(); ++i) {
            const auto& p = lists[i][idx[i]];
            v.plans.push_back(p);
            if (varies[i]) {
                v.signature.push_back(encode_signature(p.flags));
                names.push_back(flag_name(p.flags));
            }
        }
        if (names.empty()) names.push_back("Original(OpenMP)");
        for (std::size_t i = 0; i < names.size(); ++i) v.name += (i ? "+" : "") + names[i];
        out.push_back(std::move(v));
        // odometer, last block fastest
        for (std::size_t i = lists.size(); i-- > 0;) {
            if (++idx[i] < lists[i].size()) break;
            idx[i] = 0;
        }
    }
    return out;
}

} // namespace omp2hmpp
