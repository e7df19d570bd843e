#include <ccc/node.hpp>

#include <gtest/gtest.h>

using namespace ccc;

namespace
{
    ProtocolConfig cfg()
    {
        ProtocolConfig c;
        c.gamma = Ratio{79, 100};
        c.beta = Ratio{79, 100};
        return c;
    }

    StepOutput recv(NodeState &s, Message m) { return step(s, ReceiveTrigger{std::make_shared<const Message>(std::move(m))}, cfg()); }

    std::vector<Message> broadcasts(const StepOutput &o)
    {
        std::vector<Message> out;
        for (const auto &e : o.effects.items)
        {
            if (const auto *b = std::get_if<Broadcast>(&e))
            {
                out.push_back(b->message);
            }
        }
        return out;
    }

    bool joined_response(const StepOutput &o)
    {
        return std::any_of(o.effects.items.begin(), o.effects.items.end(), [](const Effect &e) { return std::holds_alternative<JoinedResponse>(e); });
    }

    ChangesSet present_joined(NodeId from, NodeId to)
    {
        ChangesSet c;
        for (NodeId n = from; n < to; ++n)
        {
            c.add(ChangeKind::enter, n);
            c.add(ChangeKind::join, n);
        }
        return c;
    }
}

TEST(Membership, EnterBroadcastsEnter)
{
    NodeState s = NodeState::fresh(7, cfg());
    const auto out = step(s, EnterTrigger{}, cfg());
    EXPECT_TRUE(s.membership.changes.contains({ChangeKind::enter, 7}));
    const auto bs = broadcasts(out);
    ASSERT_EQ(bs.size(), 1u);
    ASSERT_TRUE(std::holds_alternative<EnterMsg>(bs[0]));
    EXPECT_EQ(std::get<EnterMsg>(bs[0]).p, 7u);
}

TEST(Membership, EnterIsEchoedWithStateAndJoinFlag)
{
    NodeState s = NodeState::initial(1, {1, 2, 3}, cfg());
    s.lview = View::of({ViewEntry{2, 4, Value("v")}});
    const auto bs = broadcasts(recv(s, EnterMsg{9}));
    ASSERT_EQ(bs.size(), 1u);
    const auto &echo = std::get<EnterEchoMsg>(bs[0]);
    EXPECT_EQ(echo.q, 9u);
    EXPECT_TRUE(echo.is_joined);
    EXPECT_TRUE(echo.changes.contains({ChangeKind::enter, 9}));
    EXPECT_EQ(echo.lview, s.lview);
}

TEST(Membership, LeaveAddsEventAndEchoes)
{
    NodeState s = NodeState::initial(1, {1, 2, 3}, cfg());
    const auto bs = broadcasts(recv(s, LeaveMsg{3}));
    EXPECT_TRUE(s.membership.changes.contains({ChangeKind::leave, 3}));
    EXPECT_EQ(s.membership.changes.members_count(), 2u);
    ASSERT_EQ(bs.size(), 1u);
    EXPECT_EQ(std::get<LeaveEchoMsg>(bs[0]).q, 3u);
}

TEST(Membership, FirstJoinedEchoSetsThreshold)
{
    NodeState s = NodeState::fresh(10, cfg());
    step(s, EnterTrigger{}, cfg());
    // 9 initial nodes plus the entrant itself: |Present| = 10
    const auto out = recv(s, EnterEchoMsg{present_joined(0, 9), View{}, true, 10});
    EXPECT_EQ(s.membership.join_threshold, (Ratio{79 * 10, 100}));
    EXPECT_DOUBLE_EQ(s.membership.join_threshold.as_double(), 7.9);
    EXPECT_EQ(s.membership.join_counter, 1);
    EXPECT_FALSE(s.membership.is_joined);
    EXPECT_FALSE(joined_response(out));
}

TEST(Membership, JoinsWhenCounterReachesThreshold)
{
    NodeState s = NodeState::fresh(10, cfg());
    step(s, EnterTrigger{}, cfg());
    for (int i = 0; i < 7; ++i)
    {
        recv(s, EnterEchoMsg{present_joined(0, 9), View{}, true, 10});
    }
    EXPECT_EQ(s.membership.join_counter, 7);
    EXPECT_FALSE(s.membership.is_joined);
    const auto out = recv(s, EnterEchoMsg{ChangesSet{}, View{}, false, 10});
    EXPECT_EQ(s.membership.join_counter, 8);
    EXPECT_TRUE(s.membership.is_joined);
    EXPECT_TRUE(s.membership.changes.contains({ChangeKind::join, 10}));
    EXPECT_TRUE(joined_response(out));
    const auto bs = broadcasts(out);
    ASSERT_EQ(bs.size(), 1u);
    EXPECT_EQ(std::get<JoinMsg>(bs[0]).p, 10u);
}

TEST(Membership, UnjoinedEchoesCountButDoNotSetThreshold)
{
    NodeState s = NodeState::fresh(4, cfg());
    step(s, EnterTrigger{}, cfg());
    recv(s, EnterEchoMsg{present_joined(0, 3), View{}, false, 4});
    EXPECT_TRUE(s.membership.join_threshold.is_zero());
    EXPECT_EQ(s.membership.join_counter, 1);
    EXPECT_FALSE(s.membership.is_joined);
}

TEST(Membership, EchoForAnotherNodeStillMerges)
{
    NodeState s = NodeState::fresh(4, cfg());
    step(s, EnterTrigger{}, cfg());
    const View rv = View::of({ViewEntry{0, 1, Value("x")}});
    recv(s, EnterEchoMsg{present_joined(0, 3), rv, true, 5});
    EXPECT_EQ(s.lview, rv);
    EXPECT_TRUE(s.membership.changes.contains({ChangeKind::join, 2}));
    EXPECT_EQ(s.membership.join_counter, 0);
    EXPECT_TRUE(s.membership.join_threshold.is_zero());
}

TEST(Membership, InitialMembersAreJoined)
{
    const NodeState s = NodeState::initial(2, {0, 1, 2}, cfg());
    EXPECT_TRUE(s.membership.is_joined);
    EXPECT_EQ(s.membership.changes.members_count(), 3u);
    EXPECT_EQ(s.membership.changes.present_count(), 3u);
}

TEST(Membership, JoinImpliesEnterAfterEveryStep)
{
    // Random message sequences; the pairing must hold after each step.
    Rng rng(99);
    for (int run = 0; run < 200; ++run)
    {
        NodeState s = NodeState::fresh(50, cfg());
        step(s, EnterTrigger{}, cfg());
        ChangesSet prev = s.membership.changes;
        for (int k = 0; k < 30; ++k)
        {
            const auto who = static_cast<NodeId>(rng.uniform(0, 8));
            switch (rng.uniform(0, 4))
            {
            case 0:
                recv(s, JoinMsg{who});
                break;
            case 1:
                recv(s, JoinEchoMsg{who});
                break;
            case 2:
                recv(s, LeaveMsg{who});
                break;
            case 3:
                recv(s, EnterMsg{who});
                break;
            default:
                recv(s, EnterEchoMsg{present_joined(0, who), View{}, rng.chance(1, 2), 50});
                break;
            }
            for (NodeId n : s.membership.changes.joined())
            {
                ASSERT_TRUE(s.membership.changes.contains({ChangeKind::enter, n}));
            }
            for (const auto &e : prev.events())
            {
                ASSERT_TRUE(s.membership.changes.contains(e)) << "Changes shrank";
            }
            prev = s.membership.changes;
        }
    }
}

TEST(Membership, HaltedNodeIgnoresTriggers)
{
    NodeState s = NodeState::initial(0, {0, 1}, cfg());
    step(s, CrashTrigger{}, cfg());
    EXPECT_TRUE(broadcasts(recv(s, EnterMsg{5})).empty());
    EXPECT_FALSE(s.membership.changes.contains({ChangeKind::enter, 5}));
}
