#include <ccc/ccc.hpp>

#include <gtest/gtest.h>

using namespace ccc;

namespace
{
    constexpr Time D = kTicksPerUnit;

    Scenario static_scenario(std::set<NodeId> nodes, Time horizon = 10 * D)
    {
        Scenario s;
        s.initial_nodes = std::move(nodes);
        s.horizon = horizon;
        s.seed = 17;
        return s;
    }

    std::vector<const Record *> of_kind(const Trace &t, RecordKind k)
    {
        std::vector<const Record *> out;
        for (const auto &r : t.records)
        {
            if (r.kind == k)
            {
                out.push_back(&r);
            }
        }
        return out;
    }

    bool has_issue(const ValidationReport &r, const std::string &kind)
    {
        return std::any_of(r.issues.begin(), r.issues.end(), [&](const ValidationIssue &i) { return i.kind == kind; });
    }

    template <typename T, typename = void>
    struct has_d : std::false_type
    {
    };
    template <typename T>
    struct has_d<T, std::void_t<decltype(std::declval<T>().d)>> : std::true_type
    {
    };
    template <typename T, typename = void>
    struct has_n_min : std::false_type
    {
    };
    template <typename T>
    struct has_n_min<T, std::void_t<decltype(std::declval<T>().n_min)>> : std::true_type
    {
    };
}

TEST(Simulator, LoneNodeOnlyInitialRecords)
{
    Scenario s = static_scenario({0});
    s.params.n_min = 1;
    const Trace t = run(s);
    EXPECT_EQ(of_kind(t, RecordKind::meta).size(), 1u);
    EXPECT_EQ(of_kind(t, RecordKind::enter).size(), 1u);
    EXPECT_TRUE(of_kind(t, RecordKind::send).empty());
    EXPECT_TRUE(of_kind(t, RecordKind::receive).empty());
    for (const auto &r : t.records)
    {
        EXPECT_TRUE(r.kind == RecordKind::meta || r.kind == RecordKind::enter || r.kind == RecordKind::state);
    }
}

TEST(Simulator, EntrantJoinsWithinTwoD)
{
    Scenario s = static_scenario({0, 1, 2});
    s.params.alpha = Rational(1, 2);
    s.params.delta = 0;
    s.churn.push_back({D, ChurnKind::enter, 3});
    ASSERT_TRUE(validate_scenario(s).ok());
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        s.seed = seed;
        const Trace t = run(s);
        const auto joined = of_kind(t, RecordKind::joined);
        ASSERT_EQ(joined.size(), 1u) << "seed " << seed;
        EXPECT_EQ(joined[0]->node, 3u);
        EXPECT_LE(joined[0]->t, D + 2 * D);
    }
}

TEST(Simulator, ReplayIsByteIdentical)
{
    RandomSpec spec;
    spec.seed = 5;
    spec.crashes = 2;
    spec.ops_lo = 40;
    spec.ops_hi = 60;
    const Scenario s = generate_scenario(spec);
    EXPECT_EQ(trace_to_string(run(s)), trace_to_string(run(s)));
}

TEST(Simulator, DifferentSeedsDiffer)
{
    Scenario s = static_scenario({0, 1, 2, 3});
    s.workload = RandomWorkload{20};
    const auto a = trace_to_string(run(s));
    s.seed = 18;
    EXPECT_NE(a, trace_to_string(run(s)));
}

TEST(Simulator, TraceRoundTrip)
{
    RandomSpec spec;
    spec.seed = 11;
    spec.object = ObjectKind::snapshot;
    spec.crashes = 1;
    const Trace t = run(generate_scenario(spec));
    const std::string text = trace_to_string(t);
    EXPECT_EQ(trace_to_string(trace_from_string(text)), text);
}

TEST(Simulator, JsonlKeyOrder)
{
    const Trace t = run(static_scenario({0, 1}));
    const std::string text = trace_to_string(t);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
    {
        const auto pt = line.find("\"t\"");
        const auto pn = line.find("\"node\"");
        const auto pk = line.find("\"kind\"");
        const auto pp = line.find("\"payload\"");
        ASSERT_TRUE(pt < pn && pn < pk && pk < pp) << line;
    }
}

TEST(Simulator, DeliveryDelaysWithinBound)
{
    for (auto model : {DelayModel::uniform, DelayModel::fixed, DelayModel::adversarial, DelayModel::skewed})
    {
        Scenario s = static_scenario({0, 1, 2, 3, 4});
        s.delay.model = model;
        s.delay.fixed = D / 3;
        s.workload = RandomWorkload{30};
        const Trace t = run(s);
        std::map<std::uint64_t, Time> sent;
        for (const auto &r : t.records)
        {
            if (r.kind == RecordKind::send)
            {
                sent[r.send().id] = r.t;
            }
            else if (r.kind == RecordKind::receive)
            {
                const Time delay = r.t - sent.at(r.receive().id);
                ASSERT_GT(delay, 0);
                ASSERT_LE(delay, D);
                if (model == DelayModel::adversarial)
                {
                    ASSERT_EQ(delay, D);
                }
            }
        }
    }
}

TEST(Simulator, FifoPerSenderReceiver)
{
    Scenario s = static_scenario({0, 1, 2, 3});
    s.workload = RandomWorkload{40};
    const Trace t = run(s);
    std::map<std::uint64_t, NodeId> sender;
    std::map<std::pair<NodeId, NodeId>, std::uint64_t> last;
    for (const auto &r : t.records)
    {
        if (r.kind == RecordKind::send)
        {
            sender[r.send().id] = r.node;
        }
        else if (r.kind == RecordKind::receive)
        {
            const auto key = std::make_pair(r.receive().from, r.node);
            auto it = last.find(key);
            if (it != last.end())
            {
                ASSERT_LT(it->second, r.receive().id);
            }
            last[key] = r.receive().id;
        }
    }
}

TEST(Simulator, NoneDeliveredCrashDropsFinalBroadcast)
{
    Scenario s = static_scenario({0, 1, 2, 3, 4}, 20 * D);
    s.adversary = CrashAdversary::none_delivered;
    s.workload = std::vector<WorkloadEntry>{{D, 0, "store", json{{"value", 1}}}};
    s.churn.push_back({D, ChurnKind::crash, 0});
    ASSERT_TRUE(validate_scenario(s).ok());
    const Trace t = run(s);
    const auto truncated = check::truncated_messages(t);
    for (const auto &r : t.records)
    {
        if (r.kind == RecordKind::receive)
        {
            EXPECT_FALSE(truncated.count(r.receive().id));
        }
    }
}

TEST(Simulator, InvalidScenarioRejected)
{
    Scenario s = static_scenario({0, 1});
    s.churn.push_back({D, ChurnKind::leave, 7});
    EXPECT_THROW(run(s), std::invalid_argument);
}

TEST(Simulator, ProtocolSeesNoClock)
{
    // The transition function takes (state, trigger, config); none of them carries a time.
    static_assert(std::is_invocable_r_v<StepOutput, decltype(&step), NodeState &, const Trigger &, const ProtocolConfig &>);
    static_assert(!has_d<ProtocolConfig>::value);
    static_assert(!has_n_min<ProtocolConfig>::value);
    static_assert(!has_d<NodeState>::value);
    SUCCEED();
}

TEST(Validation, SmallSystemCannotChurn)
{
    Scenario s = static_scenario(std::set<NodeId>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    s.params.alpha = Rational(4, 100);
    s.params.delta = Rational(1, 100);
    s.churn.push_back({5 * D, ChurnKind::enter, 10});
    const auto rep = validate_scenario(s);
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(has_issue(rep, "churn"));
}

TEST(Validation, LargeSystemOneEnterPerWindow)
{
    std::set<NodeId> nodes;
    for (NodeId n = 0; n < 100; ++n)
    {
        nodes.insert(n);
    }
    Scenario s = static_scenario(nodes, 30 * D);
    s.params.alpha = Rational(4, 100);
    s.params.delta = Rational(1, 100);
    for (int k = 0; k < 10; ++k)
    {
        s.churn.push_back({(2 * k + 1) * D, ChurnKind::enter, static_cast<NodeId>(100 + k)});
    }
    const auto rep = validate_scenario(s);
    EXPECT_TRUE(rep.ok()) << rep.to_json().dump();
}

TEST(Validation, EmptyChurnAtMinimumSize)
{
    Scenario s = static_scenario({0, 1});
    s.params.n_min = 2;
    EXPECT_TRUE(validate_scenario(s).ok());
}

TEST(Validation, BelowMinimumSize)
{
    Scenario s = static_scenario({0});
    s.params.n_min = 2;
    EXPECT_TRUE(has_issue(validate_scenario(s), "min-size"));
}

TEST(Validation, TooManyCrashes)
{
    Scenario s = static_scenario({0, 1, 2, 3, 4});
    s.churn.push_back({D, ChurnKind::crash, 0});
    s.churn.push_back({2 * D, ChurnKind::crash, 1});
    // delta = 0.21: floor(0.21 * 5) = 1 crash allowed
    EXPECT_TRUE(has_issue(validate_scenario(s), "failure-fraction"));
}

TEST(Validation, WorkloadOpMustMatchObject)
{
    Scenario s = static_scenario({0, 1});
    s.workload = std::vector<WorkloadEntry>{{D, 0, "propose", json{{"value", 1}}}};
    EXPECT_FALSE(validate_scenario(s).ok());
}

TEST(Generate, ZeroChurnIsStatic)
{
    RandomSpec spec;
    spec.seed = 3;
    const Scenario s = generate_scenario(spec);
    EXPECT_TRUE(s.churn.empty());
    EXPECT_GE(s.initial_nodes.size(), 5u);
    EXPECT_LE(s.initial_nodes.size(), 20u);
}

TEST(Generate, SameSeedSameScenario)
{
    RandomSpec spec;
    spec.seed = 42;
    spec.crashes = 2;
    EXPECT_EQ(scenario_to_json(generate_scenario(spec)).dump(), scenario_to_json(generate_scenario(spec)).dump());
}

TEST(Generate, LargeSystemWithChurnValidates)
{
    RandomSpec spec;
    spec.seed = 8;
    spec.params.alpha = Rational(4, 100);
    spec.params.delta = Rational(1, 100);
    spec.params.gamma = Rational(77, 100);
    spec.params.beta = Rational(80, 100);
    spec.nodes_lo = spec.nodes_hi = 100;
    spec.horizon = 50 * D;
    spec.churn_events = 20;
    spec.ops_hi = 10;
    const Scenario s = generate_scenario(spec);
    EXPECT_FALSE(s.churn.empty());
    EXPECT_TRUE(validate_scenario(s).ok());
}

TEST(ScenarioJson, RoundTrip)
{
    RandomSpec spec;
    spec.seed = 9;
    spec.crashes = 1;
    spec.object = ObjectKind::lattice;
    spec.lattice = LatticeKind::max;
    const Scenario s = generate_scenario(spec);
    const json j = scenario_to_json(s);
    EXPECT_EQ(scenario_to_json(scenario_from_json(j)).dump(), j.dump());
    EXPECT_EQ(trace_to_string(run(scenario_from_json(j))), trace_to_string(run(s)));
}
