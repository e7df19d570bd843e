#pragma once

#include "objects.hpp"

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

namespace ccc
{
    /// What a node's protocol code is allowed to know. The churn rate and
    /// failure fraction are carried for completeness; the minimum system size
    /// and the delay bound are deliberately absent.
    struct ProtocolConfig
    {
        Rational alpha = 0;
        Rational delta = 0;
        Ratio gamma{79, 100};
        Ratio beta{79, 100};
        ObjectKind object = ObjectKind::store_collect;
        LatticeKind lattice = LatticeKind::set;
        Mutations mutations;
    };

    struct EnterTrigger
    {
    };
    struct LeaveTrigger
    {
    };
    struct CrashTrigger
    {
    };
    struct ReceiveTrigger
    {
        MessagePtr message;
    };
    struct InvokeTrigger
    {
        std::string op;
        json args;
    };

    /// Triggering events. None of them carries a time.
    using Trigger = std::variant<EnterTrigger, LeaveTrigger, CrashTrigger, ReceiveTrigger, InvokeTrigger>;

    struct NodeState
    {
        NodeId self = kNoNode;
        MembershipState membership;
        View lview;
        ClientState client;
        ObjectState object;
        bool op_pending = false;
        bool halted = false;

        /// State for a node in the initial membership.
        static NodeState initial(NodeId self, const std::set<NodeId> &initial_nodes, const ProtocolConfig &cfg)
        {
            NodeState s;
            s.self = self;
            s.membership = MembershipState::initial_member(initial_nodes);
            s.object = make_object(cfg.object, cfg.lattice, self);
            return s;
        }

        /// State for a node that enters later.
        static NodeState fresh(NodeId self, const ProtocolConfig &cfg)
        {
            NodeState s;
            s.self = self;
            s.object = make_object(cfg.object, cfg.lattice, self);
            return s;
        }
    };

    struct StepOutput
    {
        Effects effects;
    };

    namespace detail
    {
        inline ClientContext client_ctx(NodeState &s, const ProtocolConfig &cfg, Effects &out)
        {
            return ClientContext{s.self, s.lview, s.membership.changes, cfg.beta, cfg.mutations, out};
        }

        inline void run_driver(NodeState &s, const ProtocolConfig &cfg, DriverStep d, Effects &out)
        {
            if (d.response)
            {
                s.op_pending = false;
                out.items.emplace_back(OpResponse{std::move(*d.response)});
                return;
            }
            if (!d.call)
            {
                return;
            }
            if (d.call->kind == OpType::store)
            {
                invoke_store(s.client, client_ctx(s, cfg, out), std::move(d.call->value));
            }
            else
            {
                invoke_collect(s.client, client_ctx(s, cfg, out));
            }
        }

        inline void on_client_result(NodeState &s, const ProtocolConfig &cfg, const ScResult &r, Effects &out)
        {
            DriverStep d = std::visit([&](auto &drv) { return drv.on_result(r, out); }, s.object);
            run_driver(s, cfg, std::move(d), out);
        }

        inline void on_enter_echo(NodeState &s, const ProtocolConfig &cfg, const EnterEchoMsg &m, Effects &out)
        {
            auto &mem = s.membership;
            s.lview.absorb(m.lview);
            mem.changes.absorb(m.changes);
            if (mem.is_joined || m.q != s.self)
            {
                return;
            }
            if (m.is_joined && mem.join_threshold.is_zero())
            {
                mem.join_threshold = cfg.gamma.times(static_cast<std::int64_t>(mem.changes.present_count()));
            }
            ++mem.join_counter;
            if (mem.join_threshold.positive() && mem.join_threshold.reached_by(mem.join_counter))
            {
                mem.is_joined = true;
                mem.changes.add(ChangeKind::join, s.self);
                out.broadcast(JoinMsg{s.self});
                out.items.emplace_back(JoinedResponse{});
            }
        }

        struct ReceiveVisitor
        {
            NodeState &s;
            const ProtocolConfig &cfg;
            Effects &out;

            void operator()(const EnterMsg &m)
            {
                s.membership.changes.add(ChangeKind::enter, m.p);
                out.broadcast(EnterEchoMsg{s.membership.changes, s.lview, s.membership.is_joined, m.p});
            }
            void operator()(const EnterEchoMsg &m) { on_enter_echo(s, cfg, m, out); }
            void operator()(const JoinMsg &m)
            {
                s.membership.changes.add(ChangeKind::join, m.p);
                s.membership.changes.add(ChangeKind::enter, m.p);
                out.broadcast(JoinEchoMsg{m.p});
            }
            void operator()(const JoinEchoMsg &m)
            {
                s.membership.changes.add(ChangeKind::join, m.q);
                s.membership.changes.add(ChangeKind::enter, m.q);
            }
            void operator()(const LeaveMsg &m)
            {
                s.membership.changes.add(ChangeKind::leave, m.p);
                out.broadcast(LeaveEchoMsg{m.p});
            }
            void operator()(const LeaveEchoMsg &m) { s.membership.changes.add(ChangeKind::leave, m.q); }
            void operator()(const CollectQueryMsg &m) { server_handle_collect_query(s.lview, s.membership.is_joined, m, out); }
            void operator()(const CollectReplyMsg &m)
            {
                if (auto r = handle_collect_reply(s.client, client_ctx(s, cfg, out), m))
                {
                    on_client_result(s, cfg, *r, out);
                }
            }
            void operator()(const StoreMsg &m) { server_handle_store(s.lview, s.membership.is_joined, m, cfg.mutations, out); }
            void operator()(const StoreAckMsg &m)
            {
                if (auto r = handle_store_ack(s.client, client_ctx(s, cfg, out), m))
                {
                    on_client_result(s, cfg, *r, out);
                }
            }
            void operator()(const StoreEchoMsg &m) { server_handle_store_echo(s.lview, m); }
        };
    }

    /// The node transition function: new state, broadcasts and responses are
    /// determined by the old state and the trigger alone.
    inline StepOutput step(NodeState &s, const Trigger &trigger, const ProtocolConfig &cfg)
    {
        StepOutput result;
        Effects &out = result.effects;
        if (s.halted)
        {
            return result;
        }
        std::visit(
            [&](const auto &t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, EnterTrigger>)
                {
                    s.membership.changes.add(ChangeKind::enter, s.self);
                    out.broadcast(EnterMsg{s.self});
                }
                else if constexpr (std::is_same_v<T, LeaveTrigger>)
                {
                    out.broadcast(LeaveMsg{s.self});
                    s.halted = true;
                }
                else if constexpr (std::is_same_v<T, CrashTrigger>)
                {
                    s.halted = true;
                }
                else if constexpr (std::is_same_v<T, ReceiveTrigger>)
                {
                    std::visit(detail::ReceiveVisitor{s, cfg, out}, *t.message);
                }
                else if constexpr (std::is_same_v<T, InvokeTrigger>)
                {
                    if (!s.membership.is_joined || s.op_pending)
                    {
                        throw std::logic_error("ill-formed invocation at node " + std::to_string(s.self));
                    }
                    if (!op_allowed(cfg.object, t.op))
                    {
                        throw std::invalid_argument("operation '" + t.op + "' not supported by " + to_string(cfg.object));
                    }
                    s.op_pending = true;
                    DriverStep d = std::visit([&](auto &drv) { return drv.invoke(t.op, t.args, out); }, s.object);
                    detail::run_driver(s, cfg, std::move(d), out);
                }
            },
            trigger);
        return result;
    }
}
