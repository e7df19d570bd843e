#pragma once

#include "common.hpp"

namespace ccc::check
{
    /// Membership-knowledge and store-propagation predicates, checked at every
    /// recorded state of every node:
    ///   present-changes  active for 2D since entering: Changes holds every
    ///                    active membership event of [0, t-D];
    ///   joined-changes   joined: Changes holds every active membership event
    ///                    of [0, max(0, t-2D)];
    ///   joined-stores    joined: view(s) ⪯ LView for every store phase s that
    ///                    starts at or before t-2D and broadcasts without crashing.
    /// A node's state is constant between its state records, and each
    /// requirement only grows with t, so checking the state just before it
    /// changes (and at the end of the node's activity) covers every time.
    inline Verdict check_knowledge_lemmas(const Trace &t)
    {
        Verdict v;
        v.property = "knowledge";
        if (!t.meta().value("record_state", true))
        {
            v.inconclusive = true;
            v.note = "trace carries no state records";
            return v;
        }
        const Time d = t.d();
        const Time horizon = t.horizon();
        const auto life = lifetimes(t);
        const auto truncated = truncated_messages(t);

        // Active membership events, in time order.
        struct Ev
        {
            Time t;
            MembershipEvent e;
        };
        std::vector<Ev> events;
        for (NodeId n : t.meta().at("initial_nodes").get<std::vector<NodeId>>())
        {
            events.push_back({0, {ChangeKind::enter, n}});
            events.push_back({0, {ChangeKind::join, n}});
        }
        // Store phases: (start, view carried by the store broadcast).
        std::vector<std::pair<Time, std::map<NodeId, Sqno>>> stores;
        for (std::size_t i = 0; i < t.records.size(); ++i)
        {
            const auto &r = t.records[i];
            if (r.kind == RecordKind::enter && !r.data().value("initial", false))
            {
                // The enter event is active unless its broadcast was truncated by a crash.
                bool active = true;
                for (std::size_t k = i + 1; k < t.records.size() && t.records[k].t == r.t; ++k)
                {
                    const auto &s = t.records[k];
                    if (s.kind == RecordKind::send && s.node == r.node && std::holds_alternative<EnterMsg>(*s.send().message))
                    {
                        active = !truncated.count(s.send().id);
                        break;
                    }
                }
                if (active)
                {
                    events.push_back({r.t, {ChangeKind::enter, r.node}});
                }
            }
            else if (r.kind == RecordKind::send)
            {
                const auto &m = *r.send().message;
                if (const auto *j = std::get_if<JoinMsg>(&m); j && j->p == r.node && !truncated.count(r.send().id))
                {
                    events.push_back({r.t, {ChangeKind::join, r.node}});
                }
                else if (const auto *st = std::get_if<StoreMsg>(&m); st && !truncated.count(r.send().id))
                {
                    std::map<NodeId, Sqno> view;
                    for (const auto &e : st->lview.entries())
                    {
                        view[e.node] = e.sqno;
                    }
                    stores.emplace_back(r.t, std::move(view));
                }
            }
            else if (r.kind == RecordKind::leave)
            {
                events.push_back({r.t, {ChangeKind::leave, r.node}});
            }
        }
        std::stable_sort(events.begin(), events.end(), [](const Ev &a, const Ev &b) { return a.t < b.t; });

        // Prefix joins of store views, in start order.
        std::vector<Time> store_times;
        std::vector<std::map<NodeId, Sqno>> store_prefix;
        {
            std::map<NodeId, Sqno> acc;
            for (const auto &[st, view] : stores)
            {
                for (const auto &[n, q] : view)
                {
                    auto &slot = acc[n];
                    slot = std::max(slot, q);
                }
                store_times.push_back(st);
                store_prefix.push_back(acc);
            }
        }
        auto events_upto = [&](Time bound) {
            return static_cast<std::size_t>(
                std::upper_bound(events.begin(), events.end(), bound, [](Time x, const Ev &e) { return x < e.t; }) - events.begin());
        };

        struct NodeView
        {
            std::set<MembershipEvent> changes;
            std::map<NodeId, Sqno> lview;
            std::size_t known_prefix = 0; // leading events of `events` all present in changes
            std::size_t last_line = 0;
            bool seen = false;
        };
        std::map<NodeId, NodeView> nodes;
        std::set<std::string> reported;

        auto check_at = [&](NodeId n, NodeView &nv, Time at) {
            auto lit = life.nodes.find(n);
            if (lit == life.nodes.end() || at < 0)
            {
                return;
            }
            const auto &l = lit->second;
            if (!l.active_throughout(at, at))
            {
                return;
            }
            while (nv.known_prefix < events.size() && nv.changes.count(events[nv.known_prefix].e))
            {
                ++nv.known_prefix;
            }
            auto complain = [&](const std::string &lemma, const std::string &why) {
                // One report per node and lemma keeps verdicts readable.
                if (reported.insert(lemma + "/" + std::to_string(n)).second)
                {
                    v.add({nv.last_line}, lemma + ": node " + std::to_string(n) + " at t=" + std::to_string(at) + " " + why);
                }
            };
            if (at >= l.enter + 2 * d)
            {
                const auto need = events_upto(at - d);
                if (nv.known_prefix < need)
                {
                    const auto &miss = events[nv.known_prefix];
                    complain("present-changes", std::string("misses ") + to_string(miss.e.kind) + "(" + std::to_string(miss.e.node) +
                                                    ") at t=" + std::to_string(miss.t));
                }
            }
            const bool joined = l.joined && *l.joined <= at;
            if (joined)
            {
                const auto need = events_upto(std::max<Time>(0, at - 2 * d));
                if (nv.known_prefix < need)
                {
                    const auto &miss = events[nv.known_prefix];
                    complain("joined-changes", std::string("misses ") + to_string(miss.e.kind) + "(" + std::to_string(miss.e.node) +
                                                   ") at t=" + std::to_string(miss.t));
                }
                const auto k = static_cast<std::size_t>(std::upper_bound(store_times.begin(), store_times.end(), at - 2 * d) - store_times.begin());
                if (k > 0)
                {
                    for (const auto &[q, sq] : store_prefix[k - 1])
                    {
                        auto it = nv.lview.find(q);
                        if (it == nv.lview.end() || it->second < sq)
                        {
                            complain("joined-stores", "has an older value for node " + std::to_string(q) + " than a store phase 2D ago");
                            break;
                        }
                    }
                }
            }
        };

        for (std::size_t i = 0; i < t.records.size(); ++i)
        {
            const auto &r = t.records[i];
            if (r.kind != RecordKind::state)
            {
                continue;
            }
            auto &nv = nodes[r.node];
            if (nv.seen)
            {
                check_at(r.node, nv, r.t - 1);
            }
            nv.seen = true;
            nv.last_line = line_of(i);
            for (const auto &e : r.state().changes_added)
            {
                nv.changes.insert(e);
            }
            for (const auto &[q, sq] : r.state().lview_raised)
            {
                nv.lview[q] = sq;
            }
        }
        for (auto &[n, nv] : nodes)
        {
            const auto &l = life.nodes.at(n);
            Time end = horizon;
            if (const auto e = l.end())
            {
                end = std::min(end, *e - 1);
            }
            check_at(n, nv, end);
        }
        return v;
    }
}
