#pragma once

#include "scenario.hpp"
#include "trace.hpp"

#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace ccc
{
    namespace detail
    {
        enum class EventKind : std::uint8_t
        {
            churn,
            deliver,
            invoke,
            wakeup,
        };

        struct SimEvent
        {
            Time t = 0;
            std::uint64_t seq = 0;
            EventKind kind = EventKind::churn;
            std::size_t index = 0; // churn directive, delivery, workload entry
            NodeId node = kNoNode;

            bool operator>(const SimEvent &o) const { return t != o.t ? t > o.t : seq > o.seq; }
        };

        class Simulator
        {
        public:
            explicit Simulator(const Scenario &s) : m_s(s), m_cfg(s.protocol_config()), m_rng(s.seed)
            {
                m_delay_rng = Rng(m_rng.fork());
                m_crash_rng = Rng(m_rng.fork());
                m_work_rng = Rng(m_rng.fork());
                if (const auto *r = std::get_if<RandomWorkload>(&s.workload))
                {
                    m_random = *r;
                    if (m_random->mix.empty())
                    {
                        m_random->mix = default_ops(s.object);
                    }
                }
            }

            Trace run()
            {
                m_churn = sorted_churn(m_s.churn);
                emit_meta();
                for (NodeId n : m_s.initial_nodes)
                {
                    auto &rt = m_nodes[n];
                    rt.state = NodeState::initial(n, m_s.initial_nodes, m_cfg);
                    rt.entered = true;
                    rt.enter_time = 0;
                    push_record(0, n, RecordKind::enter, json{{"initial", true}});
                    record_state(0, rt);
                }
                for (std::size_t i = 0; i < m_churn.size(); ++i)
                {
                    schedule(m_churn[i].t, EventKind::churn, i, m_churn[i].node);
                }
                if (const auto *entries = std::get_if<std::vector<WorkloadEntry>>(&m_s.workload))
                {
                    for (std::size_t i = 0; i < entries->size(); ++i)
                    {
                        schedule((*entries)[i].t, EventKind::invoke, i, (*entries)[i].node);
                    }
                }
                else
                {
                    for (NodeId n : m_s.initial_nodes)
                    {
                        schedule_wakeup(0, n);
                    }
                }
                while (!m_queue.empty())
                {
                    const SimEvent ev = m_queue.top();
                    if (ev.t > m_s.horizon)
                    {
                        break;
                    }
                    m_queue.pop();
                    dispatch(ev);
                }
                return std::move(m_trace);
            }

        private:
            struct NodeRuntime
            {
                NodeState state;
                bool entered = false;
                bool crashed = false;
                bool left = false;
                Time enter_time = 0;
                std::vector<std::uint64_t> last_step_msgs;
                std::string pending_op;
                std::uint64_t pending_opid = 0;
                ChangesSet recorded_changes;
                std::vector<std::pair<NodeId, Sqno>> recorded_lview;

                bool active() const { return entered && !crashed && !left; }
            };

            struct MessageRecord
            {
                MessagePtr message;
                NodeId sender = kNoNode;
                std::vector<std::size_t> deliveries;
            };

            struct DeliveryRecord
            {
                std::uint64_t msg = 0;
                NodeId receiver = kNoNode;
                bool done = false;
                bool cancelled = false;
            };

            void schedule(Time t, EventKind kind, std::size_t index, NodeId node)
            {
                m_queue.push(SimEvent{t, m_seq++, kind, index, node});
            }

            void schedule_wakeup(Time now, NodeId n)
            {
                if (m_random && m_issued < m_random->ops)
                {
                    schedule(now + m_work_rng.uniform(1, m_random->think_max), EventKind::wakeup, 0, n);
                }
            }

            void push_record(Time t, NodeId n, RecordKind k, Payload p)
            {
                m_trace.records.push_back(Record{t, n, k, std::move(p)});
            }

            void emit_meta()
            {
                json meta;
                meta["d_ticks"] = m_s.params.d;
                meta["ticks_per_unit"] = kTicksPerUnit;
                meta["params"] = json{{"alpha", m_s.params.alpha.str()},
                                      {"delta", m_s.params.delta.str()},
                                      {"gamma", m_s.params.gamma.str()},
                                      {"beta", m_s.params.beta.str()},
                                      {"n_min", m_s.params.n_min}};
                meta["object"] = to_string(m_s.object);
                meta["lattice"] = to_string(m_s.lattice);
                meta["initial_nodes"] = m_s.initial_nodes;
                meta["horizon_ticks"] = m_s.horizon;
                meta["seed"] = m_s.seed;
                meta["delay_model"] = to_string(m_s.delay.model);
                meta["record_state"] = m_s.record_state;
                push_record(0, kNoNode, RecordKind::meta, std::move(meta));
            }

            void dispatch(const SimEvent &ev)
            {
                switch (ev.kind)
                {
                case EventKind::churn:
                    on_churn(ev.t, m_churn[ev.index]);
                    break;
                case EventKind::deliver:
                    on_deliver(ev.t, ev.index);
                    break;
                case EventKind::invoke:
                {
                    const auto &e = std::get<std::vector<WorkloadEntry>>(m_s.workload)[ev.index];
                    try_invoke(ev.t, e.node, e.op, e.args);
                    break;
                }
                case EventKind::wakeup:
                    on_wakeup(ev.t, ev.node);
                    break;
                }
            }

            void on_churn(Time t, const ChurnDirective &c)
            {
                if (c.kind == ChurnKind::enter)
                {
                    auto &rt = m_nodes[c.node];
                    rt.state = NodeState::fresh(c.node, m_cfg);
                    rt.entered = true;
                    rt.enter_time = t;
                    push_record(t, c.node, RecordKind::enter, json::object());
                    apply_step(t, rt, EnterTrigger{});
                    return;
                }
                auto it = m_nodes.find(c.node);
                if (it == m_nodes.end() || !it->second.active())
                {
                    throw std::logic_error("churn directive for inactive node " + std::to_string(c.node));
                }
                auto &rt = it->second;
                if (c.kind == ChurnKind::leave)
                {
                    // The leave broadcast is the node's final step; it is not truncated.
                    apply_step(t, rt, LeaveTrigger{});
                    rt.left = true;
                    push_record(t, c.node, RecordKind::leave, json::object());
                    return;
                }
                crash(t, rt);
            }

            void crash(Time t, NodeRuntime &rt)
            {
                json truncated = json::array();
                json dropped = json::array();
                for (std::uint64_t id : rt.last_step_msgs)
                {
                    truncated.push_back(id);
                    for (std::size_t di : m_msgs[id].deliveries)
                    {
                        auto &dl = m_deliveries[di];
                        if (dl.done)
                        {
                            continue;
                        }
                        const bool drop = m_s.adversary == CrashAdversary::none_delivered || m_crash_rng.chance(1, 2);
                        if (drop)
                        {
                            dl.cancelled = true;
                            dropped.push_back(json::array({id, dl.receiver}));
                        }
                    }
                }
                step(rt.state, CrashTrigger{}, m_cfg);
                rt.crashed = true;
                push_record(t, rt.state.self, RecordKind::crash, json{{"truncated", std::move(truncated)}, {"dropped", std::move(dropped)}});
            }

            void on_deliver(Time t, std::size_t di)
            {
                auto &dl = m_deliveries[di];
                dl.done = true;
                if (dl.cancelled)
                {
                    return;
                }
                auto it = m_nodes.find(dl.receiver);
                if (it == m_nodes.end() || !it->second.active())
                {
                    return;
                }
                const auto &mr = m_msgs[dl.msg];
                push_record(t, dl.receiver, RecordKind::receive, ReceiveInfo{dl.msg, mr.sender});
                apply_step(t, it->second, ReceiveTrigger{mr.message});
            }

            void on_wakeup(Time t, NodeId n)
            {
                if (!m_random || m_issued >= m_random->ops)
                {
                    return;
                }
                auto it = m_nodes.find(n);
                if (it == m_nodes.end() || !it->second.active() || it->second.state.op_pending || !it->second.state.membership.is_joined)
                {
                    return;
                }
                const auto &mix = m_random->mix;
                const std::string op = mix[static_cast<std::size_t>(m_work_rng.uniform(0, static_cast<std::int64_t>(mix.size()) - 1))];
                try_invoke(t, n, op, random_args(op));
            }

            json random_args(const std::string &op)
            {
                const std::int64_t unique = m_issued + 1;
                if (op == "store" || op == "update")
                {
                    return json{{"value", unique}};
                }
                if (op == "writemax" || op == "addset" || op == "propose")
                {
                    return json{{"value", m_work_rng.uniform(0, m_random->value_range)}};
                }
                return json::object();
            }

            void try_invoke(Time t, NodeId n, const std::string &op, const json &args)
            {
                auto it = m_nodes.find(n);
                std::string reason;
                if (it == m_nodes.end() || !it->second.active())
                {
                    reason = "node not active";
                }
                else if (!it->second.state.membership.is_joined)
                {
                    reason = "node not joined";
                }
                else if (it->second.state.op_pending)
                {
                    reason = "operation pending";
                }
                else if (!op_allowed(m_s.object, op))
                {
                    reason = "operation not supported by object";
                }
                if (!reason.empty())
                {
                    push_record(t, n, RecordKind::skip, json{{"op", op}, {"args", args}, {"reason", reason}});
                    return;
                }
                auto &rt = it->second;
                ++m_issued;
                rt.pending_op = op;
                rt.pending_opid = m_next_opid++;
                push_record(t, n, RecordKind::invoke, json{{"op", op}, {"args", args}, {"opid", rt.pending_opid}});
                apply_step(t, rt, InvokeTrigger{op, args});
            }

            Time draw_delay(NodeId from, NodeId to)
            {
                switch (m_s.delay.model)
                {
                case DelayModel::skewed:
                {
                    const Time d = m_s.params.d;
                    auto [it, fresh] = m_link_fast.try_emplace({from, to}, false);
                    if (fresh)
                    {
                        it->second = m_delay_rng.chance(1, 2);
                    }
                    return it->second ? m_delay_rng.uniform(1, std::max<Time>(1, d / 10)) : m_delay_rng.uniform(d - d / 10, d);
                }
                case DelayModel::uniform:
                    return m_delay_rng.uniform(1, m_s.params.d);
                case DelayModel::fixed:
                    return m_s.delay.fixed;
                case DelayModel::adversarial:
                    return m_s.params.d;
                }
                return m_s.params.d;
            }

            std::uint64_t send(Time t, NodeId sender, Message m)
            {
                const std::uint64_t id = m_msgs.size();
                MessageRecord mr;
                mr.message = std::make_shared<const Message>(std::move(m));
                mr.sender = sender;
                push_record(t, sender, RecordKind::send, SendInfo{id, mr.message});
                for (auto &[n, rt] : m_nodes)
                {
                    if (!rt.active())
                    {
                        continue;
                    }
                    const std::uint64_t key = (static_cast<std::uint64_t>(sender) << 32) | n;
                    Time at = t + draw_delay(sender, n);
                    auto &last = m_fifo[key];
                    at = std::max(at, last);
                    last = at;
                    const std::size_t di = m_deliveries.size();
                    m_deliveries.push_back(DeliveryRecord{id, n});
                    mr.deliveries.push_back(di);
                    schedule(at, EventKind::deliver, di, n);
                }
                m_msgs.push_back(std::move(mr));
                return id;
            }

            void apply_step(Time t, NodeRuntime &rt, const Trigger &trigger)
            {
                const NodeId self = rt.state.self;
                StepOutput out = step(rt.state, trigger, m_cfg);
                rt.last_step_msgs.clear();
                bool responded = false;
                for (auto &eff : out.effects.items)
                {
                    std::visit(
                        [&](auto &e) {
                            using T = std::decay_t<decltype(e)>;
                            if constexpr (std::is_same_v<T, Broadcast>)
                            {
                                rt.last_step_msgs.push_back(send(t, self, std::move(e.message)));
                            }
                            else if constexpr (std::is_same_v<T, Note>)
                            {
                                push_record(t, self, RecordKind::note, std::move(e.data));
                            }
                            else if constexpr (std::is_same_v<T, JoinedResponse>)
                            {
                                push_record(t, self, RecordKind::joined, json::object());
                                responded = true;
                            }
                            else
                            {
                                push_record(t, self, RecordKind::response,
                                            json{{"op", rt.pending_op}, {"result", std::move(e.result)}, {"opid", rt.pending_opid}});
                                rt.pending_op.clear();
                                responded = true;
                            }
                        },
                        eff);
                }
                record_state(t, rt);
                if (responded && rt.active())
                {
                    schedule_wakeup(t, self);
                }
            }

            void record_state(Time t, NodeRuntime &rt)
            {
                if (!m_s.record_state)
                {
                    return;
                }
                StateDelta delta;
                const auto &changes = rt.state.membership.changes;
                if (changes.size() != rt.recorded_changes.size())
                {
                    for (const auto &e : changes.events())
                    {
                        if (rt.recorded_changes.add(e))
                        {
                            delta.changes_added.push_back(e);
                        }
                    }
                }
                const auto &entries = rt.state.lview.entries();
                auto &rec = rt.recorded_lview;
                std::size_t j = 0;
                std::vector<std::pair<NodeId, Sqno>> merged;
                bool lview_changed = false;
                for (const auto &e : entries)
                {
                    while (j < rec.size() && rec[j].first < e.node)
                    {
                        merged.push_back(rec[j++]);
                    }
                    if (j < rec.size() && rec[j].first == e.node)
                    {
                        if (rec[j].second != e.sqno)
                        {
                            delta.lview_raised.emplace_back(e.node, e.sqno);
                            lview_changed = true;
                        }
                        merged.emplace_back(e.node, e.sqno);
                        ++j;
                    }
                    else
                    {
                        delta.lview_raised.emplace_back(e.node, e.sqno);
                        merged.emplace_back(e.node, e.sqno);
                        lview_changed = true;
                    }
                }
                if (lview_changed)
                {
                    while (j < rec.size())
                    {
                        merged.push_back(rec[j++]);
                    }
                    rec = std::move(merged);
                }
                if (!delta.changes_added.empty() || !delta.lview_raised.empty())
                {
                    push_record(t, rt.state.self, RecordKind::state, std::move(delta));
                }
            }

            const Scenario &m_s;
            ProtocolConfig m_cfg;
            Rng m_rng;
            Rng m_delay_rng{0};
            Rng m_crash_rng{0};
            Rng m_work_rng{0};
            std::optional<RandomWorkload> m_random;
            std::vector<ChurnDirective> m_churn;
            std::map<NodeId, NodeRuntime> m_nodes;
            std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> m_queue;
            std::uint64_t m_seq = 0;
            std::vector<MessageRecord> m_msgs;
            std::vector<DeliveryRecord> m_deliveries;
            std::unordered_map<std::uint64_t, Time> m_fifo;
            std::map<std::pair<NodeId, NodeId>, bool> m_link_fast;
            std::int64_t m_issued = 0;
            std::uint64_t m_next_opid = 0;
            Trace m_trace;
        };
    }

    /// Runs a validated scenario to its horizon and returns the trace. Pure in
    /// the scenario: the same scenario always yields the same trace.
    inline Trace run(const Scenario &scenario)
    {
        const auto rep = validate_scenario(scenario);
        if (!rep.ok())
        {
            throw std::invalid_argument("scenario fails validation: " + rep.issues.front().kind + ": " + rep.issues.front().detail);
        }
        return detail::Simulator(scenario).run();
    }
}
