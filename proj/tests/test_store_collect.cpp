#include <ccc/store_collect.hpp>

#include <gtest/gtest.h>

using namespace ccc;

namespace
{
    struct Harness
    {
        NodeId self = 0;
        View lview;
        ChangesSet changes;
        ClientState client;
        Effects out;
        Mutations mutations;

        explicit Harness(std::size_t members)
        {
            for (NodeId n = 0; n < members; ++n)
            {
                changes.add(ChangeKind::enter, n);
                changes.add(ChangeKind::join, n);
            }
        }

        ClientContext ctx() { return ClientContext{self, lview, changes, Ratio{79, 100}, mutations, out}; }

        std::vector<Message> take()
        {
            std::vector<Message> bs;
            for (const auto &e : out.items)
            {
                if (const auto *b = std::get_if<Broadcast>(&e))
                {
                    bs.push_back(b->message);
                }
            }
            out.items.clear();
            return bs;
        }
    };

    ViewEntry e(NodeId n, const char *v, Sqno k) { return ViewEntry{n, k, Value(v)}; }
}

TEST(StoreCollect, StoreBroadcastsViewWithNewTriple)
{
    Harness h(3);
    invoke_store(h.client, h.ctx(), Value("7"));
    EXPECT_EQ(h.client.sqno, 1u);
    EXPECT_EQ(h.client.tag, 1u);
    EXPECT_EQ(h.client.threshold, (Ratio{237, 100}));
    const auto bs = h.take();
    ASSERT_EQ(bs.size(), 1u);
    const auto &m = std::get<StoreMsg>(bs[0]);
    EXPECT_EQ(m.tag, 1u);
    EXPECT_EQ(m.p, 0u);
    EXPECT_EQ(m.lview, View::of({e(0, "7", 1)}));
}

TEST(StoreCollect, SecondStoreSupersedesFirst)
{
    Harness h(3);
    invoke_store(h.client, h.ctx(), Value("7"));
    h.client.phase = ClientPhase::idle;
    invoke_store(h.client, h.ctx(), Value("9"));
    EXPECT_EQ(h.lview, View::of({e(0, "9", 2)}));
}

TEST(StoreCollect, ThresholdFloorWithNoMembers)
{
    Harness h(0);
    invoke_store(h.client, h.ctx(), Value("1"));
    EXPECT_EQ(h.client.threshold, (Ratio{1, 1}));
    h.take();
    const auto r = handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0});
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->op, OpType::store);
}

TEST(StoreCollect, AckWithWrongTagIgnored)
{
    Harness h(3);
    invoke_store(h.client, h.ctx(), Value("7"));
    EXPECT_FALSE(handle_store_ack(h.client, h.ctx(), StoreAckMsg{5, 0}).has_value());
    EXPECT_FALSE(handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 2}).has_value());
    EXPECT_EQ(h.client.counter, 0);
}

TEST(StoreCollect, StoreCompletesOnThirdAck)
{
    Harness h(3);
    invoke_store(h.client, h.ctx(), Value("7"));
    EXPECT_FALSE(handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0}).has_value());
    EXPECT_FALSE(handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0}).has_value());
    EXPECT_EQ(h.client.counter, 2);
    const auto r = handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0});
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->op, OpType::store);
    EXPECT_EQ(h.client.phase, ClientPhase::idle);
}

TEST(StoreCollect, CollectMergesRepliesThenStoresBack)
{
    Harness h(3);
    invoke_collect(h.client, h.ctx());
    auto bs = h.take();
    ASSERT_EQ(bs.size(), 1u);
    EXPECT_EQ(std::get<CollectQueryMsg>(bs[0]).tag, 1u);

    EXPECT_FALSE(handle_collect_reply(h.client, h.ctx(), CollectReplyMsg{View::of({e(1, "5", 2)}), 1, 0}).has_value());
    EXPECT_FALSE(handle_collect_reply(h.client, h.ctx(), CollectReplyMsg{View::of({e(1, "4", 1), e(2, "8", 3)}), 1, 0}).has_value());
    EXPECT_TRUE(h.take().empty());
    EXPECT_EQ(h.lview, View::of({e(1, "5", 2), e(2, "8", 3)}));

    EXPECT_FALSE(handle_collect_reply(h.client, h.ctx(), CollectReplyMsg{View{}, 1, 0}).has_value());
    bs = h.take();
    ASSERT_EQ(bs.size(), 1u);
    EXPECT_EQ(std::get<StoreMsg>(bs[0]).lview, h.lview);
    EXPECT_EQ(h.client.phase, ClientPhase::store_phase);

    for (int i = 0; i < 2; ++i)
    {
        EXPECT_FALSE(handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0}).has_value());
    }
    const auto r = handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0});
    ASSERT_TRUE(r.has_value());
    EXPECT_EQ(r->op, OpType::collect);
    EXPECT_EQ(r->view, h.lview);
}

TEST(StoreCollect, CollectInEmptySystemReturnsEmptyView)
{
    Harness h(1);
    invoke_collect(h.client, h.ctx());
    handle_collect_reply(h.client, h.ctx(), CollectReplyMsg{View{}, 1, 0});
    const auto r = handle_store_ack(h.client, h.ctx(), StoreAckMsg{1, 0});
    ASSERT_TRUE(r.has_value());
    EXPECT_TRUE(r->view.empty());
}

TEST(StoreCollect, StoreBackThresholdReflectsNewMembers)
{
    Harness h(3);
    invoke_collect(h.client, h.ctx());
    const Ratio first = h.client.threshold;
    for (NodeId n = 3; n < 6; ++n)
    {
        h.changes.add(ChangeKind::enter, n);
        h.changes.add(ChangeKind::join, n);
    }
    for (int i = 0; i < 3; ++i)
    {
        handle_collect_reply(h.client, h.ctx(), CollectReplyMsg{View{}, 1, 0});
    }
    ASSERT_EQ(h.client.phase, ClientPhase::store_phase);
    EXPECT_GT(h.client.threshold.as_double(), first.as_double());
}

TEST(StoreCollect, SkipStoreBackMutationReturnsAfterCollectPhase)
{
    Harness h(1);
    h.mutations.skip_store_back = true;
    invoke_collect(h.client, h.ctx());
    h.take();
    const auto r = handle_collect_reply(h.client, h.ctx(), CollectReplyMsg{View::of({e(2, "x", 1)}), 1, 0});
    ASSERT_TRUE(r.has_value());
    EXPECT_TRUE(h.take().empty());
}

TEST(StoreCollectServer, UnjoinedServerEchoesWithoutAck)
{
    View lview;
    Effects out;
    server_handle_store(lview, false, StoreMsg{View::of({e(1, "a", 1)}), 3, 1}, Mutations{}, out);
    ASSERT_EQ(out.items.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<StoreEchoMsg>(std::get<Broadcast>(out.items[0]).message));
    EXPECT_EQ(lview, View::of({e(1, "a", 1)}));
}

TEST(StoreCollectServer, JoinedServerAcksAndEchoes)
{
    View lview = View::of({e(2, "b", 4)});
    Effects out;
    server_handle_store(lview, true, StoreMsg{View::of({e(1, "a", 1)}), 3, 1}, Mutations{}, out);
    ASSERT_EQ(out.items.size(), 2u);
    const auto &ack = std::get<StoreAckMsg>(std::get<Broadcast>(out.items[0]).message);
    EXPECT_EQ(ack.tag, 3u);
    EXPECT_EQ(ack.q, 1u);
    EXPECT_EQ(std::get<StoreEchoMsg>(std::get<Broadcast>(out.items[1]).message).lview, View::of({e(1, "a", 1), e(2, "b", 4)}));
}

TEST(StoreCollectServer, DropStoreEchoMutation)
{
    View lview;
    Effects out;
    Mutations m;
    m.drop_store_echo = true;
    server_handle_store(lview, true, StoreMsg{View{}, 1, 1}, m, out);
    ASSERT_EQ(out.items.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<StoreAckMsg>(std::get<Broadcast>(out.items[0]).message));
}

TEST(StoreCollectServer, EchoMerges)
{
    View lview = View::of({e(1, "a", 1)});
    server_handle_store_echo(lview, StoreEchoMsg{View::of({e(1, "b", 2)})});
    EXPECT_EQ(lview, View::of({e(1, "b", 2)}));
}

TEST(StoreCollectServer, CollectQueryGatedOnJoin)
{
    const View w = View::of({e(1, "a", 1)});
    Effects silent;
    server_handle_collect_query(w, false, CollectQueryMsg{2, 5}, silent);
    EXPECT_TRUE(silent.items.empty());

    Effects out;
    server_handle_collect_query(w, true, CollectQueryMsg{2, 5}, out);
    ASSERT_EQ(out.items.size(), 1u);
    const auto &r = std::get<CollectReplyMsg>(std::get<Broadcast>(out.items[0]).message);
    EXPECT_EQ(r.lview, w);
    EXPECT_EQ(r.tag, 2u);
    EXPECT_EQ(r.q, 5u);
}

TEST(StoreCollectServer, SelfQueryAnswered)
{
    // The client's own server answers its query like any other node.
    Harness h(1);
    invoke_collect(h.client, h.ctx());
    const auto q = std::get<CollectQueryMsg>(h.take()[0]);
    Effects srv;
    server_handle_collect_query(h.lview, true, q, srv);
    const auto reply = std::get<CollectReplyMsg>(std::get<Broadcast>(srv.items[0]).message);
    handle_collect_reply(h.client, h.ctx(), reply);
    EXPECT_EQ(h.client.phase, ClientPhase::store_phase);
}
