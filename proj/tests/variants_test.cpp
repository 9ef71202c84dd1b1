#include "omp2hmpp/diagnostic.hpp"
#include "omp2hmpp/variants.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace omp2hmpp;

namespace {

// Brute force over the five HMPP booleans, straight from the feasibility rules.
int feasible_count()
{
    int n = 0;
    for (int t = 0; t < 32; ++t) {
        bool a = t & 1, d = t & 2, s = t & 4, no = t & 8, r = t & 16;
        if ((!no || a) && (!s || a || d) && (!r || a || d)) ++n;
    }
    return n;
}

std::vector<FlagSet> all_flagsets()
{
    std::vector<FlagSet> out;
    for (int t = 0; t < 128; ++t) {
        FlagSet f;
        f.advancedload = t & 1;
        f.release = t & 2;
        f.asynchronous = t & 4;
        f.noupdate = t & 8;
        f.delegatedstore = t & 16;
        f.group = t & 32;
        f.baseline = t & 64;
        out.push_back(f);
    }
    return out;
}

} // namespace

TEST(Signature, ReferenceRows)
{
    FlagSet f;
    f.advancedload = f.noupdate = f.delegatedstore = true;
    EXPECT_EQ(encode_signature(f), (Signature{9, 1, 0}));
    EXPECT_EQ(flag_name(f), "Adv_loaddelStoreNoUpdate");

    FlagSet g = f;
    g.release = g.group = true;
    EXPECT_EQ(encode_signature(g), (Signature{11, 3, 0}));
    EXPECT_EQ(flag_name(g).rfind("Adv_loadRel", 0), 0u);

    FlagSet base;
    base.baseline = true;
    EXPECT_EQ(encode_signature(base), (Signature{0, 0, 0}));
    EXPECT_EQ(flag_name(base), "Original(OpenMP)");

    auto d = decode_signature({10, 1, 0});
    EXPECT_TRUE(d.advancedload && d.release && d.delegatedstore);
    EXPECT_FALSE(d.noupdate || d.asynchronous || d.group || d.baseline);
    EXPECT_TRUE(decode_signature({0, 0, 0}).baseline);
    EXPECT_TRUE(decode_signature({0, 0, 1}).plain());
}

TEST(Signature, InfeasibleRejected)
{
    try {
        decode_signature({1, 0, 0});
        FAIL();
    } catch (const CompileError& e) {
        EXPECT_NE(e.diagnostics()[0].message.find("noupdate requires advancedload"), std::string::npos);
    }
    EXPECT_THROW(decode_signature({16, 0, 0}), CompileError);
    EXPECT_THROW(decode_signature({8, 0, 1}), CompileError);
    EXPECT_THROW(decode_signature({4, 0, 0}), CompileError);
}

TEST(Signature, ExhaustiveRoundTrip)
{
    std::set<Signature> seen;
    int feasible = 0;
    for (const auto& f : all_flagsets()) {
        if (flag_violation(f)) {
            EXPECT_THROW(encode_signature(f), CompileError);
            continue;
        }
        ++feasible;
        auto s = encode_signature(f);
        EXPECT_TRUE(seen.insert(s).second) << "duplicate " << s.str();
        EXPECT_EQ(decode_signature(s), f);
        if (s == Signature{0, 0, 0}) EXPECT_TRUE(f.baseline);
    }
    EXPECT_EQ(feasible, 2 * 21 + 1);
}

TEST(Enumerate, TwentyOnePlusBaseline)
{
    EXPECT_EQ(feasible_count(), 21);
    auto v = enumerate_variants(0, false);
    ASSERT_EQ(v.size(), 22u);
    EXPECT_TRUE(v[0].flags.baseline);
    std::set<Signature> sigs;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto s = encode_signature(v[i].flags);
        sigs.insert(s);
        EXPECT_EQ(decode_signature(s), v[i].flags);
        EXPECT_FALSE(v[i].flags.group);
        if (i) EXPECT_LT(encode_signature(v[i - 1].flags), s);
    }
    EXPECT_EQ(sigs.size(), 22u);
    EXPECT_EQ(enumerate_variants(0, true).size(), 43u);

    // deterministic
    auto again = enumerate_variants(0, false);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(again[i].flags, v[i].flags);
}

TEST(PlansForUnit, Products)
{
    EXPECT_EQ(plans_for_unit({{0, true, std::nullopt, false}}).size(), 22u);

    auto pinned = plans_for_unit({{0, false, std::array<unsigned, 3>{9, 1, 0}, false}});
    ASSERT_EQ(pinned.size(), 1u);
    EXPECT_EQ(pinned[0].signature_text(), "9, 1, 0");
    EXPECT_EQ(pinned[0].file_suffix(), "9_1_0");

    auto both_fixed = plans_for_unit(
        {{0, false, std::array<unsigned, 3>{9, 3, 0}, true}, {1, false, std::array<unsigned, 3>{11, 3, 0}, true}});
    EXPECT_EQ(both_fixed.size(), 1u);

    auto mixed = plans_for_unit({{0, false, std::array<unsigned, 3>{9, 3, 0}, true}, {1, true, std::nullopt, true}});
    ASSERT_EQ(mixed.size(), 43u);
    EXPECT_EQ(mixed[0].signature_text(), "0, 0, 0");
    EXPECT_TRUE(mixed[0].flags_for(0)->group);

    // two independent check blocks fit under the cap, two sharing state do not
    EXPECT_EQ(plans_for_unit({{0, true, std::nullopt, false}, {1, true, std::nullopt, false}}).size(), 484u);
    EXPECT_THROW(plans_for_unit({{0, true, std::nullopt, true}, {1, true, std::nullopt, true}}), CompileError);
    EXPECT_THROW(plans_for_unit({{0, true, std::nullopt, false}, {1, true, std::nullopt, false}}, 100), CompileError);

    auto none = plans_for_unit({{0, false, std::nullopt, false}});
    ASSERT_EQ(none.size(), 1u);
    EXPECT_TRUE(none[0].plans[0].flags.baseline);
}
