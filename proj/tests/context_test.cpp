#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/context.hpp"
#include "omp2hmpp/transform.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace omp2hmpp;

namespace {

struct Fixture {
    SourceUnit unit;
    const FunctionDef* fn = nullptr;
    int kernel = -1;

    explicit Fixture(const std::string& src, const std::string& function = "main")
        : unit(parse_translation_unit(src, "t.c"))
    {
        fn = unit.find_function(function);
        for (const auto& b : find_omp_blocks(unit))
            if (b.candidate() && b.function == function) {
                kernel = b.stmt_id;
                break;
            }
    }

    std::string first_line(const Stmt& s) const
    {
        std::string t = print_stmt(s);
        auto b = t.find_first_not_of(' ');
        t = t.substr(b);
        while (t.rfind("#pragma", 0) == 0) {
            t = t.substr(t.find('\n') + 1);
            t = t.substr(t.find_first_not_of(' '));
        }
        return t.substr(0, t.find('\n'));
    }

    // "before <first line of statement>" or "end of <first line of owner>"
    std::string describe(const Gap& g) const
    {
        const Stmt* list = find_stmt(*fn->body, g.list);
        if (!list) return "?";
        if (g.index < static_cast<int>(list->children.size()))
            return "before " + first_line(list->children[static_cast<std::size_t>(g.index)]);
        if (list->id == fn->body->id) return "end of function";
        // owner: the statement whose child is this list
        std::string owner = "?";
        for_each_stmt(*fn->body, [&](const Stmt& s) {
            for (const auto& c : s.children)
                if (c.id == list->id) owner = first_line(s);
        });
        return "end of " + owner;
    }

    int id_of(const std::string& prefix) const
    {
        int id = -1;
        for_each_stmt(*fn->body, [&](const Stmt& s) {
            if (id < 0 && s.kind != StmtKind::Compound && first_line(s).rfind(prefix, 0) == 0) id = s.id;
        });
        if (id < 0) throw std::runtime_error("no statement " + prefix);
        return id;
    }

    std::function<bool(const Stmt&)> writes(const std::string& sym) const
    {
        auto scan = std::make_shared<AccessScanner>(unit);
        int k = kernel;
        return [scan, sym, k](const Stmt& s) {
            // the kernel's own accesses are not host writes
            Stmt copy = s;
            if (Stmt* inner = find_stmt(copy, k)) *inner = Stmt{};
            for (const auto& a : scan->stmt(copy))
                if (a.symbol == sym && a.kind == AccessKind::Write) return true;
            return false;
        };
    }

    std::function<bool(const Stmt&)> touches(const std::string& sym) const
    {
        auto scan = std::make_shared<AccessScanner>(unit);
        return [scan, sym](const Stmt& s) {
            for (const auto& a : scan->stmt(s))
                if (a.symbol == sym) return true;
            return false;
        };
    }
};

std::string events(const ContextTable& t, const std::string& sym)
{
    std::string out;
    auto it = t.events.find(sym);
    if (it == t.events.end()) return out;
    for (const auto& e : it->second) {
        if (!out.empty()) out += ", ";
        out += std::string(e.kind == AccessKind::Read ? "R" : "W") + "@" + (e.host == Host::Cpu ? "CPU" : "GPU");
    }
    return out;
}

const char* kFig5 = R"(int main()
{
    int i;
    double A[16], C[16];
    for (i = 0; i < 16; ++i) {
        A[i] = i;
    }
#pragma omp parallel for check
    for (i = 0; i < 16; i++) {
        C[i] = A[i] * 2;
    }
    printf("%g\n", C[3]);
    return 0;
}
)";

} // namespace

// ---------------------------------------------------------------- scanner and table

TEST(Scanner, CompoundAssignmentIsReadThenWrite)
{
    auto u = parse_translation_unit("int main()\n{\nint r[2][2];\nint i = 0, j = 0;\nr[i][j] += 1;\nreturn 0;\n}\n");
    AccessScanner scan(u);
    const Stmt& s = u.find_function("main")->body->children[2];
    auto as = scan.stmt(s);
    std::vector<std::string> seen;
    for (const auto& a : as) seen.push_back(a.symbol + (a.kind == AccessKind::Read ? ":R" : ":W"));
    EXPECT_EQ(seen, (std::vector<std::string>{"i:R", "j:R", "r:R", "r:W"}));
}

TEST(Scanner, DefinedCallsUseSummaries)
{
    std::string src = R"(double g[4];
void fill(double t[4], double s[4])
{
    int i;
    for (i = 0; i < 4; i++) {
        t[i] = s[i] + g[i];
    }
}
int main()
{
    double a[4], b[4];
    fill(a, b);
    printf("%g\n", a[0]);
    return 0;
}
)";
    auto u = parse_translation_unit(src);
    AccessScanner scan(u);
    auto as = scan.stmt(u.find_function("main")->body->children[1]);
    bool a_written = false, b_written = false, g_read = false;
    for (const auto& x : as) {
        if (x.symbol == "a" && x.kind == AccessKind::Write) a_written = true;
        if (x.symbol == "b" && x.kind == AccessKind::Write) b_written = true;
        if (x.symbol == "g" && x.kind == AccessKind::Read) g_read = true;
    }
    EXPECT_TRUE(a_written);
    EXPECT_FALSE(b_written);
    EXPECT_TRUE(g_read);
}

TEST(Scanner, OpaqueCallsReadArgumentsAndAddressTakenIsReadWrite)
{
    auto u = parse_translation_unit(
        "void ext(double *p);\nint main()\n{\ndouble t[4];\nint n = 0;\next(t);\nscanf(\"%d\", &n);\nint *q = &n;\nreturn 0;\n}\n");
    AccessScanner scan(u);
    const auto& body = u.find_function("main")->body->children;
    auto a1 = scan.stmt(body[2]);
    ASSERT_EQ(a1.size(), 1u);
    EXPECT_EQ(a1[0].kind, AccessKind::Read);
    auto a2 = scan.stmt(body[3]);
    ASSERT_EQ(a2.size(), 2u);
    EXPECT_EQ(a2[1].kind, AccessKind::Write);
    EXPECT_TRUE(scan.unanalyzable(*u.find_function("main")->body).count("n"));
}

TEST(ContextTable, Figure5Scenario)
{
    Fixture f(kFig5);
    auto t = build_context_table(f.unit, *f.fn, {f.kernel});
    EXPECT_EQ(events(t, "A"), "W@CPU, R@GPU");
    EXPECT_EQ(events(t, "C"), "W@GPU, R@CPU");
    // sorted by site; loop paths recorded
    for (const auto& [sym, evs] : t.events)
        for (std::size_t i = 1; i < evs.size(); ++i) EXPECT_LE(evs[i - 1].site, evs[i].site);
    EXPECT_EQ(t.events.at("A").front().loop_path.size(), 1u);
    EXPECT_NE(t.dump().find("A W @"), std::string::npos);
}

TEST(ContextTable, KernelSymbolsAlwaysHaveEntries)
{
    for (const char* file : {"table1.c", "table3.c", "table5.c", "jacobi.c"}) {
        auto u = parse_translation_unit(read_data(file));
        std::set<int> ks;
        for (const auto& b : find_omp_blocks(u))
            if (b.candidate()) ks.insert(b.stmt_id);
        const FunctionDef* fn = u.find_function("main");
        auto t = build_context_table(u, *fn, ks);
        for (int k : ks) {
            const Stmt& s = *find_stmt(*fn->body, k);
            auto blocks = find_omp_blocks(u);
            auto b = std::find_if(blocks.begin(), blocks.end(), [&](const OmpBlock& x) { return x.stmt_id == k; });
            for (const auto& p : infer_codelet_params(u, *fn, s, b->omp)) {
                if (p.kind != CodeletParam::Kind::Array) continue;
                ASSERT_TRUE(t.events.count(p.symbol)) << file << " " << p.symbol;
                bool gpu = false;
                for (const auto& e : t.events.at(p.symbol)) gpu = gpu || e.host == Host::Gpu;
                EXPECT_TRUE(gpu);
            }
        }
    }
}

TEST(ContextTable, UnusedSymbolHasNoGpuEvents)
{
    Fixture f(R"(int main()
{
    int i;
    double A[4], Z[4];
    Z[0] = 1;
#pragma omp parallel for check
    for (i = 0; i < 4; i++) {
        A[i] = i;
    }
    return 0;
}
)");
    auto t = build_context_table(f.unit, *f.fn, {f.kernel});
    EXPECT_EQ(events(t, "Z"), "W@CPU");
}

TEST(ContextTable, AccumulationInKernelIsReadAndWrite)
{
    auto u = parse_translation_unit(read_data("table1.c"));
    auto b = find_omp_blocks(u).at(0);
    auto t = build_context_table(u, *u.find_function("main"), {b.stmt_id});
    std::string r = events(t, "result");
    EXPECT_NE(r.find("R@GPU"), std::string::npos);
    EXPECT_NE(r.find("W@GPU"), std::string::npos);
}

TEST(IoDirection, Rules)
{
    std::vector<Access> seq = {{"a", AccessKind::Read}, {"b", AccessKind::Write}, {"c", AccessKind::Write},
                               {"c", AccessKind::Read}};
    EXPECT_EQ(infer_io_direction("a", seq), "in");
    EXPECT_EQ(infer_io_direction("b", seq), "out");
    EXPECT_EQ(infer_io_direction("c", seq), "inout");
}

// ---------------------------------------------------------------- placement

TEST(Placement, Figure6LoadAfterLastWrite)
{
    Fixture f(R"(int main()
{
    int i;
    double A[8], B[8];
    A[0] = 1;
    B[0] = 2;
    A[1] = 3;
    B[1] = 4;
#pragma omp parallel for check
    for (i = 0; i < 8; i++) {
        B[i] = A[i];
    }
    return 0;
}
)");
    EXPECT_EQ(f.describe(last_cpu_write_site(*f.fn, f.kernel, "A", f.writes("A"))), "before B[1] = 4;");
}

TEST(Placement, NoPriorWriteMeansAfterDeclaration)
{
    Fixture f(R"(int main()
{
    int i;
    double A[8];
    double B[8];
#pragma omp parallel for check
    for (i = 0; i < 8; i++) {
        B[i] = A[i];
    }
    return 0;
}
)");
    EXPECT_EQ(f.describe(last_cpu_write_site(*f.fn, f.kernel, "A", f.writes("A"))), "before double B[8];");
}

TEST(Placement, Figure7LoopBacktracking)
{
    Fixture f(R"(int main()
{
    int i, j, t;
    double A[8], B[8];
    for (t = 0; t < 4; t++) {
        for (j = 0; j < 8; j++) {
            A[j] = j + t;
        }
        B[0] = t;
    }
    for (t = 0; t < 3; t++) {
#pragma omp parallel for check
        for (i = 0; i < 8; i++) {
            B[i] = A[i];
        }
    }
    return 0;
}
)");
    // write nested in a loop that does not enclose the kernel: after that loop
    EXPECT_EQ(f.describe(last_cpu_write_site(*f.fn, f.kernel, "A", f.writes("A"))), "before for (t = 0; t < 3; t++) {");
}

TEST(Placement, WriteInsideTheKernelLoopStaysInside)
{
    Fixture f(R"(int main()
{
    int i, t;
    double A[8], B[8];
    for (t = 0; t < 3; t++) {
        A[t] = t;
        B[0] = 0;
#pragma omp parallel for check
        for (i = 0; i < 8; i++) {
            B[i] = A[i];
        }
    }
    return 0;
}
)");
    EXPECT_EQ(f.describe(last_cpu_write_site(*f.fn, f.kernel, "A", f.writes("A"))), "before B[0] = 0;");
}

TEST(Placement, LoopCarriedWriteAfterTheKernelPinsLoadBeforeIt)
{
    Fixture f(R"(int main()
{
    int i, t;
    double A[8], B[8];
    A[0] = 1;
    for (t = 0; t < 3; t++) {
#pragma omp parallel for check
        for (i = 0; i < 8; i++) {
            B[i] = A[i];
        }
        A[0] = B[1];
    }
    return 0;
}
)");
    // the next iteration sees the host write: reload every iteration
    EXPECT_EQ(f.describe(last_cpu_write_site(*f.fn, f.kernel, "A", f.writes("A"))), "before for (i = 0; i < 8; i++) {");
}

TEST(Placement, Figure8StoreBeforeFirstRead)
{
    Fixture f(R"(int main()
{
    int i;
    double A[8], C[8];
    int x = 0;
#pragma omp parallel for check
    for (i = 0; i < 8; i++) {
        C[i] = A[i];
    }
    x = x + 1;
    x = x * 2;
    printf("%g %d\n", C[0], x);
    return 0;
}
)");
    auto g = first_cpu_read_site(*f.fn, f.kernel, f.touches("C"), [](const Gap&) { return false; }, false);
    ASSERT_TRUE(g);
    EXPECT_EQ(f.describe(*g), "before printf(\"%g %d\\n\", C[0], x);");
}

TEST(Placement, DeadOutputHasNoStore)
{
    Fixture f(R"(int main()
{
    int i;
    double A[8], C[8];
#pragma omp parallel for check
    for (i = 0; i < 8; i++) {
        C[i] = A[i];
    }
    return 0;
}
)");
    EXPECT_FALSE(first_cpu_read_site(*f.fn, f.kernel, f.touches("C"), [](const Gap&) { return false; }, false));
    // unless the value escapes the function: then before the trailing return
    auto g = first_cpu_read_site(*f.fn, f.kernel, f.touches("C"), [](const Gap&) { return false; }, true);
    ASSERT_TRUE(g);
    EXPECT_EQ(f.describe(*g), "before return 0;");
}

TEST(Placement, Figure9ConsumerInDeeperNest)
{
    Fixture f(R"(int main()
{
    int i, j, k;
    double A[8], C[8];
    double s = 0;
#pragma omp parallel for check
    for (i = 0; i < 8; i++) {
        C[i] = A[i];
    }
    s = 1;
    for (j = 0; j < 4; j++) {
        for (k = 0; k < 8; k++) {
            s = s + C[k];
        }
    }
    printf("%g\n", s);
    return 0;
}
)");
    auto g = first_cpu_read_site(*f.fn, f.kernel, f.touches("C"), [](const Gap&) { return false; }, false);
    ASSERT_TRUE(g);
    EXPECT_EQ(f.describe(*g), "before for (j = 0; j < 4; j++) {");
}

TEST(Placement, ConsumerLaterInTheSameLoopGivesPerIterationStore)
{
    Fixture f(R"(int main()
{
    int i, t;
    double A[8], C[8];
    double s = 0;
    for (t = 0; t < 3; t++) {
        s = s + C[0];
#pragma omp parallel for check
        for (i = 0; i < 8; i++) {
            C[i] = A[i];
        }
        A[0] = t;
    }
    return 0;
}
)");
    auto g = first_cpu_read_site(*f.fn, f.kernel, f.touches("C"), [](const Gap&) { return false; }, false);
    ASSERT_TRUE(g);
    EXPECT_EQ(f.describe(*g), "end of for (t = 0; t < 3; t++) {");
}

TEST(Placement, PlainKernelGetsNoDirectives)
{
    Fixture f(kFig5);
    KernelInfo k;
    k.block = f.kernel;
    k.label = "k";
    k.order = {"A", "C"};
    k.arrays = {"A", "C"};
    k.inputs = {"A"};
    k.outputs = {"C"};
    k.uses = {"i", "A", "C"};
    k.arg_of = {{"i", "i"}, {"A", "A"}, {"C", "C"}};
    auto plan = build_transfer_plan(f.unit, *f.fn, {k});
    EXPECT_TRUE(plan.directives.empty());
    EXPECT_TRUE(plan.noupdate.empty());
}

TEST(Placement, SingleKernelLoadAndStoreWithoutGroup)
{
    Fixture f(kFig5);
    KernelInfo k;
    k.block = f.kernel;
    k.label = "k";
    k.flags.advancedload = true;
    k.flags.delegatedstore = true;
    k.flags.release = true;
    k.order = {"A", "C"};
    k.arrays = {"A", "C"};
    k.inputs = {"A", "C"};
    k.outputs = {"C"};
    k.uses = {"i", "A", "C"};
    k.arg_of = {{"i", "i"}, {"A", "A"}, {"C", "C"}};
    auto plan = build_transfer_plan(f.unit, *f.fn, {k});
    std::vector<std::string> got;
    for (const auto& d : plan.directives) {
        std::string s = d.kind == DirectiveKind::Advancedload     ? "load"
                        : d.kind == DirectiveKind::Delegatedstore ? "store"
                        : d.kind == DirectiveKind::Release        ? "release"
                                                                   : "other";
        for (const auto& x : d.symbols) s += " " + x;
        got.push_back(s + " " + f.describe(d.gap));
    }
    EXPECT_EQ(got, (std::vector<std::string>{"load C before for (i = 0; i < 16; ++i) {",
                                             "load A before for (i = 0; i < 16; i++) {",
                                             "store C before printf(\"%g\\n\", C[3]);",
                                             "release before return 0;"}));
}

TEST(Placement, UnanalyzableArrayFallsBackToCallsite)
{
    Fixture f(R"(void use(double *p);
int main()
{
    int i;
    double A[8], C[8];
    double *alias = &A[0];
    use(alias);
#pragma omp parallel for check
    for (i = 0; i < 8; i++) {
        C[i] = A[i];
    }
    printf("%g\n", C[0]);
    return 0;
}
)");
    KernelInfo k;
    k.block = f.kernel;
    k.label = "k";
    k.flags.advancedload = true;
    k.flags.noupdate = true;
    k.order = {"A", "C"};
    k.arrays = {"A", "C"};
    k.inputs = {"A"};
    k.outputs = {"C"};
    k.uses = {"i", "A", "C"};
    k.arg_of = {{"i", "i"}, {"A", "A"}, {"C", "C"}};
    auto plan = build_transfer_plan(f.unit, *f.fn, {k});
    EXPECT_TRUE(plan.fallback.count("A"));
    EXPECT_TRUE(plan.directives.empty());
    EXPECT_TRUE(plan.noupdate.empty() || !plan.noupdate.begin()->second.count("A"));
}
