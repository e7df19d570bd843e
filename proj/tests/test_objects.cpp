#include <ccc/ccc.hpp>

#include <gtest/gtest.h>

using namespace ccc;

namespace
{
    constexpr Time D = kTicksPerUnit;

    /// Operations spaced 20D apart, so each completes before the next begins.
    Scenario sequential(ObjectKind obj, std::vector<std::tuple<NodeId, std::string, json>> ops)
    {
        Scenario s;
        s.initial_nodes = {0, 1, 2, 3};
        s.object = obj;
        s.seed = 4;
        std::vector<WorkloadEntry> w;
        Time t = D;
        for (auto &[n, op, args] : ops)
        {
            w.push_back({t, n, op, args});
            t += 20 * D;
        }
        s.workload = std::move(w);
        s.horizon = t + 20 * D;
        return s;
    }

    std::vector<check::Operation> ops_of(const Trace &t)
    {
        auto s = check::extract_schedule(t);
        for (const auto &op : s.ops)
        {
            EXPECT_FALSE(op.pending()) << op.op;
        }
        return s.ops;
    }

    json v(std::int64_t x) { return json{{"value", x}}; }
}

TEST(Snapshot, UpdateThenScan)
{
    const Trace t = run(sequential(ObjectKind::snapshot, {{0, "update", v(5)}, {0, "scan", json::object()}}));
    const auto ops = ops_of(t);
    ASSERT_EQ(ops.size(), 2u);
    EXPECT_EQ(ops[1].result.at("view"), json::parse(R"([[0, 5]])"));
}

TEST(Snapshot, ScanSeesLatestUpdatePerNode)
{
    const Trace t = run(sequential(ObjectKind::snapshot,
                                   {{0, "update", v(1)}, {1, "update", v(2)}, {0, "update", v(3)}, {2, "scan", json::object()}}));
    const auto ops = ops_of(t);
    EXPECT_EQ(ops.back().result.at("view"), json::parse(R"([[0, 3], [1, 2]])"));
}

TEST(Snapshot, ScanOfEmptyObject)
{
    const Trace t = run(sequential(ObjectKind::snapshot, {{1, "scan", json::object()}}));
    EXPECT_TRUE(ops_of(t)[0].result.at("view").empty());
}

TEST(Snapshot, RFilterDropsBottomCells)
{
    SnapshotCell bottom;
    bottom.ssqno = 2;
    SnapshotCell real;
    real.val = "7";
    real.usqno = 1;
    const CellView cv{{0, bottom}, {1, real}};
    const auto r = r_filter(cv);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].first, 1u);

    const View encoded = View::of({ViewEntry{0, 1, encode_cell(bottom)}, ViewEntry{1, 1, encode_cell(real)}});
    EXPECT_EQ(r_filter(encoded).size(), 1u);
    EXPECT_TRUE(r_filter(View{}).empty());
}

TEST(Snapshot, CellCodecRoundTrip)
{
    SnapshotCell c;
    c.val = "\"x\"";
    c.usqno = 3;
    c.ssqno = 2;
    c.sview = {{0, "1"}, {4, "2"}};
    c.scounts = {{0, 1}, {4, 2}};
    EXPECT_EQ(decode_cell(encode_cell(c)), c);
}

TEST(Lattice, LoneProposeReturnsInput)
{
    Scenario s = sequential(ObjectKind::lattice, {{0, "propose", v(1)}});
    s.lattice = LatticeKind::set;
    const auto ops = ops_of(run(s));
    EXPECT_EQ(ops[0].result.at("value"), json::array({1}));
}

TEST(Lattice, SequentialProposesAccumulate)
{
    Scenario s = sequential(ObjectKind::lattice, {{0, "propose", v(1)}, {1, "propose", v(2)}});
    s.lattice = LatticeKind::set;
    const auto ops = ops_of(run(s));
    EXPECT_EQ(ops[1].result.at("value"), json::array({1, 2}));
}

TEST(Lattice, ConcurrentOutputsComparable)
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed)
    {
        Scenario s;
        s.initial_nodes = {0, 1, 2, 3, 4};
        s.object = ObjectKind::lattice;
        s.lattice = LatticeKind::set;
        s.seed = seed;
        s.horizon = 40 * D;
        s.workload = std::vector<WorkloadEntry>{{D, 0, "propose", v(1)}, {D, 1, "propose", v(2)}, {D, 2, "propose", v(3)}};
        const auto ops = ops_of(run(s));
        ASSERT_EQ(ops.size(), 3u);
        std::vector<std::set<std::int64_t>> outs;
        for (const auto &op : ops)
        {
            outs.push_back(op.result.at("value").get<std::set<std::int64_t>>());
        }
        for (const auto &a : outs)
        {
            for (const auto &b : outs)
            {
                const bool ab = std::includes(b.begin(), b.end(), a.begin(), a.end());
                const bool ba = std::includes(a.begin(), a.end(), b.begin(), b.end());
                ASSERT_TRUE(ab || ba) << "seed " << seed;
            }
        }
    }
}

TEST(Lattice, MaxLattice)
{
    Scenario s = sequential(ObjectKind::lattice, {{0, "propose", v(4)}, {1, "propose", v(2)}});
    s.lattice = LatticeKind::max;
    const auto ops = ops_of(run(s));
    EXPECT_EQ(ops[0].result.at("value"), 4);
    EXPECT_EQ(ops[1].result.at("value"), 4);
}

TEST(LatticeKinds, JoinAndOrder)
{
    const auto a = SetLattice::from_json(json::array({1, 2}));
    const auto b = SetLattice::from_json(json(3));
    EXPECT_TRUE(SetLattice::leq(SetLattice::bottom(), a));
    EXPECT_FALSE(SetLattice::leq(a, b));
    EXPECT_EQ(SetLattice::to_json(SetLattice::join(a, b)), json::array({1, 2, 3}));
    EXPECT_EQ(MaxLattice::join(3, 9), 9);
    EXPECT_TRUE(MaxLattice::leq(3, 9));
}

TEST(MaxRegister, ReadWithoutWritesIsZero)
{
    const auto ops = ops_of(run(sequential(ObjectKind::max_register, {{0, "readmax", json::object()}})));
    EXPECT_EQ(ops[0].result.at("value"), 0);
}

TEST(MaxRegister, ReadReturnsLargest)
{
    const auto ops = ops_of(run(sequential(ObjectKind::max_register, {{0, "writemax", v(3)}, {1, "writemax", v(7)}, {2, "readmax", json::object()}})));
    EXPECT_EQ(ops[2].result.at("value"), 7);
}

TEST(MaxRegister, DecreasingWritesByOneNode)
{
    const auto ops = ops_of(run(sequential(ObjectKind::max_register, {{0, "writemax", v(9)}, {0, "writemax", v(2)}, {1, "readmax", json::object()}})));
    EXPECT_EQ(ops[2].result.at("value"), 9);
}

TEST(AbortFlag, CheckBeforeAndAfterAbort)
{
    const auto ops = ops_of(run(sequential(ObjectKind::abort_flag,
                                           {{0, "check", json::object()}, {1, "abort", json::object()}, {2, "check", json::object()}})));
    EXPECT_EQ(ops[0].result.at("value"), false);
    EXPECT_EQ(ops[2].result.at("value"), true);
}

TEST(SetObject, ReadsetUnion)
{
    const auto ops = ops_of(run(sequential(ObjectKind::set, {{0, "addset", v(4)}, {1, "addset", v(2)}, {0, "addset", v(4)}, {3, "readset", json::object()}})));
    EXPECT_EQ(ops[3].result.at("value"), json::array({2, 4}));
}

TEST(Objects, RandomRunsPassObjectChecker)
{
    for (auto obj : {ObjectKind::max_register, ObjectKind::abort_flag, ObjectKind::set})
    {
        for (std::uint64_t seed = 1; seed <= 15; ++seed)
        {
            RandomSpec spec;
            spec.seed = seed;
            spec.object = obj;
            spec.crashes = 1;
            const Trace t = run(generate_scenario(spec));
            const auto verdict = check::check_objects(t);
            ASSERT_TRUE(verdict.pass()) << to_string(obj) << " seed " << seed << " " << verdict.to_json().dump();
        }
    }
}
