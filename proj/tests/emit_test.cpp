#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/emit.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace omp2hmpp;

namespace {

SourceUnit load(const std::string& name) { return parse_translation_unit(read_data(name), name); }

std::string uniform(const std::string& file, unsigned a, unsigned b, unsigned c)
{
    auto u = load(file);
    return emit_variant(u, uniform_variant(u, decode_signature({a, b, c}))).source;
}

// Independent keyword count: plain regex over the directive lines.
int grep_count(const std::string& text, const std::string& word)
{
    int n = 0;
    std::istringstream in(text);
    std::string line;
    std::regex re("\\b" + word + "\\b");
    while (std::getline(in, line)) {
        if (line.find("#pragma hmpp") == std::string::npos) continue;
        line = std::regex_replace(line, std::regex("\"[^\"]*\""), "");
        n += static_cast<int>(std::distance(std::sregex_iterator(line.begin(), line.end(), re), std::sregex_iterator()));
    }
    return n;
}

std::string stripped(const std::string& source) { return print_unit(strip_pragmas(parse_translation_unit(source, "v"))); }

// Every variant, pragmas stripped, must print what the original prints.
void differential(const std::string& file, bool cxx_original = false, std::size_t expected = 0)
{
    auto u = load(file);
    auto ref = run_host_program(read_data(file), cxx_original);
    ASSERT_TRUE(ref.has_value()) << file;
    auto vs = emit_all(u);
    if (expected) EXPECT_EQ(vs.size(), expected);
    for (const auto& v : vs) {
        auto out = run_host_program(stripped(v.source), cxx_original);
        ASSERT_TRUE(out.has_value()) << file << " " << v.signature;
        EXPECT_EQ(*out, *ref) << file << " " << v.signature;
    }
}

} // namespace

TEST(EmitGolden, Table1PlainCodelet) { EXPECT_EQ(uniform("table1.c", 0, 0, 1), read_data("golden/table1_codelet.c")); }

TEST(EmitGolden, Table3Reduction) { EXPECT_EQ(uniform("table3.c", 0, 0, 1), read_data("golden/table3_codelet.c")); }

TEST(EmitGolden, Table5Optimized)
{
    auto text = uniform("table5.c", 11, 3, 0);
    EXPECT_EQ(text, read_data("golden/table5_optimized.c"));
    // shape the optimized jacobi must have
    EXPECT_NE(text.find("group, target=CUDA"), std::string::npos);
    EXPECT_NE(text.find("mapbyname, myTable, myTableOut"), std::string::npos);
    EXPECT_EQ(grep_count(text, "advancedload"), 1);
    EXPECT_EQ(grep_count(text, "release"), 1);
    auto load = text.find("advancedload");
    auto loop = text.find("for (index = 0");
    EXPECT_LT(load, loop);
    auto store = text.find("delegatedstore, args[myTable]");
    EXPECT_LT(store, text.find("displayRegion(myTable);\n    #pragma hmpp <group0_34> release"));
}

TEST(EmitGolden, Table6Async)
{
    auto text = uniform("table6.c", 13, 1, 0);
    EXPECT_EQ(text, read_data("golden/table6_async.c"));
    auto call = text.find("callsite, args[");
    auto sync = text.find("synchronize");
    ASSERT_NE(call, std::string::npos);
    ASSERT_NE(sync, std::string::npos);
    EXPECT_LT(call, sync);
    EXPECT_NE(text.find("asynchronous"), std::string::npos);
}

TEST(EmitGolden, RegionSplitBaseline)
{
    auto u = load("region.c");
    auto vs = emit_all(u);
    EXPECT_EQ(vs.size(), 43u);
    EXPECT_EQ(vs[0].source, read_data("golden/region_split.c"));
}

TEST(Emit, OutputReparses)
{
    for (auto file : {"table1.c", "table3.c", "jacobi.c", "region.c", "table6.c", "inline_kernel.c"}) {
        auto u = load(file);
        for (const auto& v : emit_all(u)) {
            SourceUnit again;
            ASSERT_NO_THROW(again = parse_translation_unit(v.source, v.name)) << file << " " << v.signature;
            EXPECT_EQ(print_unit(again), v.source) << file << " " << v.signature;
        }
    }
}

TEST(Emit, Deterministic)
{
    auto a = emit_all(load("jacobi.c"));
    auto b = emit_all(load("jacobi.c"));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].source, b[i].source);
        EXPECT_EQ(a[i].name, b[i].name);
    }
}

TEST(Emit, ManifestMatchesText)
{
    for (auto file : {"table1.c", "jacobi.c", "region.c", "table6.c"}) {
        for (const auto& v : emit_all(load(file))) {
            EXPECT_EQ(v.manifest, count_directives(v.source));
            for (const auto& [word, n] : v.manifest) EXPECT_EQ(n, grep_count(v.source, word)) << word;
        }
    }
}

TEST(Emit, CountDirectivesSkipsStringsAndPlainCode)
{
    std::string text = "#pragma hmpp <g> k advancedload, args[a].addr=\"release\"\n"
                       "int release = 1;\n"
                       "#pragma hmpp & args[b].noupdate=true\n"
                       "#pragma hmppcg gridify(i)\n";
    auto m = count_directives(text);
    EXPECT_EQ(m["advancedload"], 1);
    EXPECT_EQ(m.count("release"), 0u);
    EXPECT_EQ(m["gridify"], 1);
}

TEST(Emit, BaselineIsTheOpenMPSourceWithoutToolClauses)
{
    auto u = load("table1.c");
    auto vs = emit_all(u);
    ASSERT_FALSE(vs.empty());
    EXPECT_EQ(vs[0].signature, "0, 0, 0");
    EXPECT_EQ(vs[0].manifest.size(), 0u);
    auto expected = read_data("table1.c");
    expected = std::regex_replace(expected, std::regex(" check"), "");
    EXPECT_EQ(vs[0].source, print_unit(parse_translation_unit(expected, "t")));
}

TEST(Emit, CapExceededIsAnError)
{
    auto u = load("table5.c"); // two checked, group-eligible blocks: 43 * 43
    EXPECT_THROW(emit_all(u), CompileError);
    EXPECT_NO_THROW(emit_all(u, 43 * 43));
}

TEST(Emit, GroupDroppedWhenBlockIsAlone)
{
    auto u = load("table6.c");
    auto v = uniform_variant(u, decode_signature({13, 3, 0}));
    auto r = emit_variant(u, v);
    EXPECT_TRUE(r.groups.empty());
    EXPECT_EQ(r.source.find("group"), std::string::npos);
}

TEST(Emit, VariantNamesComeFromCheckBlocks)
{
    auto vs = emit_all(load("jacobi.c"));
    ASSERT_EQ(vs.size(), 43u); // fixed(9,3,0) pinned, the checked block varies (group-eligible)
    std::set<std::string> suffixes;
    for (const auto& v : vs) {
        EXPECT_EQ(v.signature.find('|'), std::string::npos);
        suffixes.insert(v.suffix);
    }
    EXPECT_EQ(suffixes.size(), vs.size());
}

TEST(Emit, WriteAndReadManifest)
{
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / ("omp2hmpp_emit_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    auto vs = emit_all(load("table1.c"));
    auto paths = write_variants(dir, "table1", vs);
    ASSERT_EQ(paths.size(), vs.size());
    auto entries = read_manifest(dir / "manifest.txt");
    ASSERT_EQ(entries.size(), vs.size());
    for (std::size_t i = 0; i < vs.size(); ++i) {
        EXPECT_EQ(entries[i].name, vs[i].name);
        EXPECT_EQ(entries[i].signature, vs[i].signature);
        EXPECT_TRUE(fs::exists(dir / entries[i].file));
        std::ifstream in(dir / entries[i].file);
        std::stringstream ss;
        ss << in.rdbuf();
        EXPECT_EQ(ss.str(), vs[i].source);
    }
    EXPECT_EQ(entries[0].file, "table1__0_0_0.c");
    fs::remove_all(dir);
}

namespace {

void reduction_case(const std::string& src, const std::string& expected_out, const std::string& clause)
{
    auto ref = run_host_program(src);
    ASSERT_TRUE(ref.has_value());
    EXPECT_EQ(*ref, expected_out);
    auto u = parse_translation_unit(src, "red.c");
    auto vs = emit_all(u);
    EXPECT_EQ(vs.size(), 22u);
    for (const auto& v : vs) {
        auto out = run_host_program(stripped(v.source));
        ASSERT_TRUE(out.has_value()) << v.signature << "\n" << v.source;
        EXPECT_EQ(*out, *ref) << v.signature;
    }
    auto plain = emit_variant(u, uniform_variant(u, decode_signature({0, 0, 1}))).source;
    EXPECT_NE(plain.find(clause), std::string::npos) << plain;
}

} // namespace

TEST(Emit, MultiplicativeReduction)
{
    reduction_case("int main()\n{\n    int i;\n    double p = 3.0;\n"
                   "#pragma omp parallel for reduction(*:p) check\n"
                   "    for (i = 0; i < 3; i++) {\n        p *= 2;\n    }\n"
                   "    printf(\"%g\\n\", p);\n    return 0;\n}\n",
                   "24\n", "reduce(*:p)");
}

TEST(Emit, UnusedReductionVariableRoundTrips)
{
    reduction_case("int main()\n{\n    int i;\n    double q = 5.5;\n    double v[8];\n"
                   "#pragma omp parallel for reduction(+:q) check\n"
                   "    for (i = 0; i < 8; i++) {\n        v[i] = i * 0.5;\n    }\n"
                   "    printf(\"%g %g\\n\", q, v[7]);\n    return 0;\n}\n",
                   "5.5 3.5\n", "double q = *q_reduced;");
}

TEST(EmitDifferential, Table1) { differential("table1.c", false, 22); }
TEST(EmitDifferential, Jacobi) { differential("jacobi.c", false, 43); }
TEST(EmitDifferential, Region) { differential("region.c", false, 43); }
TEST(EmitDifferential, Table6) { differential("table6.c"); }
TEST(EmitDifferential, InlinedKernel) { differential("inline_kernel.c", true, 22); }
