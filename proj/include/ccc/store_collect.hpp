#pragma once

#include "message.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace ccc
{
    // ---- step effects ---------------------------------------------------

    struct Broadcast
    {
        Message message;
    };

    /// Internal bookkeeping emitted for the trace (phase boundaries, sub-operations).
    struct Note
    {
        json data;
    };

    struct JoinedResponse
    {
    };

    struct OpResponse
    {
        json result;
    };

    using Effect = std::variant<Broadcast, Note, JoinedResponse, OpResponse>;

    struct Effects
    {
        std::vector<Effect> items;

        void broadcast(Message m) { items.emplace_back(Broadcast{std::move(m)}); }
        void note(json j) { items.emplace_back(Note{std::move(j)}); }
    };

    /// Fault switches used only by the negative-control tests.
    struct Mutations
    {
        bool drop_store_echo = false;
        bool skip_store_back = false;

        bool any() const { return drop_store_echo || skip_store_back; }
    };

    // ---- client ---------------------------------------------------------

    enum class OpType
    {
        none,
        collect,
        store,
    };

    enum class ClientPhase
    {
        idle,
        collect_phase,
        store_phase,
    };

    struct ClientState
    {
        OpType optype = OpType::none;
        ClientPhase phase = ClientPhase::idle;
        std::uint64_t tag = 0;
        Ratio threshold{0, 1};
        std::int64_t counter = 0;
        Sqno sqno = 0;
    };

    /// Completion of a store (ack) or collect (view).
    struct ScResult
    {
        OpType op = OpType::none;
        View view;
    };

    /// What the client needs from the rest of the node for one handler call.
    struct ClientContext
    {
        NodeId self;
        View &lview;
        const ChangesSet &changes;
        Ratio beta;
        Mutations mutations;
        Effects &out;
    };

    namespace detail
    {
        /// beta * |Members|, floored at 1 so a phase never completes on zero responses.
        inline Ratio phase_threshold(const ClientContext &ctx)
        {
            Ratio t = ctx.beta.times(static_cast<std::int64_t>(ctx.changes.members_count()));
            return t.positive() ? t : Ratio{1, 1};
        }

        inline void phase_note(Effects &out, const char *event, const char *phase, std::uint64_t tag)
        {
            out.note(json{{"sub", "phase"}, {"event", event}, {"phase", phase}, {"tag", tag}});
        }
    }

    inline void invoke_collect(ClientState &s, ClientContext ctx)
    {
        s.optype = OpType::collect;
        ++s.tag;
        s.threshold = detail::phase_threshold(ctx);
        s.counter = 0;
        s.phase = ClientPhase::collect_phase;
        detail::phase_note(ctx.out, "begin", "collect", s.tag);
        ctx.out.broadcast(CollectQueryMsg{s.tag, ctx.self});
    }

    inline void invoke_store(ClientState &s, ClientContext ctx, Value v)
    {
        s.optype = OpType::store;
        ++s.tag;
        ++s.sqno;
        ctx.lview.absorb(View::of({ViewEntry{ctx.self, s.sqno, std::move(v)}}));
        s.threshold = detail::phase_threshold(ctx);
        s.counter = 0;
        s.phase = ClientPhase::store_phase;
        detail::phase_note(ctx.out, "begin", "store", s.tag);
        ctx.out.broadcast(StoreMsg{ctx.lview, s.tag, ctx.self});
    }

    inline std::optional<ScResult> handle_collect_reply(ClientState &s, ClientContext ctx, const CollectReplyMsg &m)
    {
        if (m.tag != s.tag || m.q != ctx.self || s.phase != ClientPhase::collect_phase)
        {
            return std::nullopt;
        }
        ctx.lview.absorb(m.lview);
        ++s.counter;
        if (!s.threshold.reached_by(s.counter))
        {
            return std::nullopt;
        }
        detail::phase_note(ctx.out, "end", "collect", s.tag);
        if (ctx.mutations.skip_store_back)
        {
            s.phase = ClientPhase::idle;
            s.optype = OpType::none;
            return ScResult{OpType::collect, ctx.lview};
        }
        // store-back: threshold recomputed to reflect churn seen during the collect phase
        s.threshold = detail::phase_threshold(ctx);
        s.counter = 0;
        s.phase = ClientPhase::store_phase;
        detail::phase_note(ctx.out, "begin", "store", s.tag);
        ctx.out.broadcast(StoreMsg{ctx.lview, s.tag, ctx.self});
        return std::nullopt;
    }

    inline std::optional<ScResult> handle_store_ack(ClientState &s, ClientContext ctx, const StoreAckMsg &m)
    {
        if (m.tag != s.tag || m.q != ctx.self || s.phase != ClientPhase::store_phase)
        {
            return std::nullopt;
        }
        ++s.counter;
        if (!s.threshold.reached_by(s.counter))
        {
            return std::nullopt;
        }
        detail::phase_note(ctx.out, "end", "store", s.tag);
        const OpType done = s.optype;
        s.phase = ClientPhase::idle;
        s.optype = OpType::none;
        if (done == OpType::store)
        {
            return ScResult{OpType::store, {}};
        }
        return ScResult{OpType::collect, ctx.lview};
    }

    // ---- server ---------------------------------------------------------

    inline void server_handle_store(View &lview, bool is_joined, const StoreMsg &m, Mutations mutations, Effects &out)
    {
        lview.absorb(m.lview);
        if (is_joined)
        {
            out.broadcast(StoreAckMsg{m.tag, m.p});
        }
        if (!mutations.drop_store_echo)
        {
            out.broadcast(StoreEchoMsg{lview});
        }
    }

    inline void server_handle_collect_query(const View &lview, bool is_joined, const CollectQueryMsg &m, Effects &out)
    {
        if (is_joined)
        {
            out.broadcast(CollectReplyMsg{lview, m.tag, m.p});
        }
    }

    inline void server_handle_store_echo(View &lview, const StoreEchoMsg &m) { lview.absorb(m.lview); }
}
