#pragma once

#include "common.hpp"
#include "snapshot.hpp"

namespace ccc::check
{
    /// Latency budget of an operation in units of D, or 0 when unbounded.
    inline int op_latency_budget(const std::string &op)
    {
        if (op == "store" || op == "writemax" || op == "abort" || op == "addset")
        {
            return 2;
        }
        if (op == "collect" || op == "readmax" || op == "check" || op == "readset")
        {
            return 4;
        }
        return 0;
    }

    struct LivenessOptions
    {
        bool joins = true;
        bool phases = true;
        bool operations = true;
        bool scan_bound = true;
        std::int64_t scan_slack = 0; // unsuccessful double collects allowed beyond N(t)
    };

    /// Join liveness (2D), phase latency (2D), operation latency (2D/4D) and
    /// the scan double-collect bound. Deadlines beyond the horizon, and nodes
    /// that crash or leave before a deadline, are exempt.
    inline Verdict check_liveness(const Trace &t, const LivenessOptions &opt = {})
    {
        Verdict v;
        v.property = "liveness";
        const Time d = t.d();
        const Time horizon = t.horizon();
        const auto life = lifetimes(t);

        auto must_finish = [&](NodeId n, Time start, Time deadline) {
            if (deadline > horizon)
            {
                return false;
            }
            auto it = life.nodes.find(n);
            return it != life.nodes.end() && it->second.active_throughout(start, deadline);
        };

        if (opt.joins)
        {
            for (const auto &[n, l] : life.nodes)
            {
                if (l.initial)
                {
                    continue;
                }
                const Time deadline = l.enter + 2 * d;
                const bool late = !l.joined || *l.joined > deadline;
                if (late && must_finish(n, l.enter, deadline))
                {
                    v.add({l.enter_line}, "node " + std::to_string(n) + " entered at " + std::to_string(l.enter) + " and did not join within 2D");
                }
            }
        }

        if (opt.phases)
        {
            std::map<NodeId, std::pair<std::size_t, Time>> open;
            for (std::size_t i = 0; i < t.records.size(); ++i)
            {
                const auto &r = t.records[i];
                if (r.kind != RecordKind::note || r.data().value("sub", std::string()) != "phase")
                {
                    continue;
                }
                if (r.data().at("event") == "begin")
                {
                    open[r.node] = {i, r.t};
                    continue;
                }
                auto it = open.find(r.node);
                if (it == open.end())
                {
                    continue;
                }
                if (r.t - it->second.second > 2 * d)
                {
                    v.add({line_of(it->second.first), line_of(i)}, "phase at node " + std::to_string(r.node) + " took longer than 2D");
                }
                open.erase(it);
            }
            for (const auto &[n, b] : open)
            {
                if (must_finish(n, b.second, b.second + 2 * d))
                {
                    v.add({line_of(b.first)}, "phase at node " + std::to_string(n) + " never completed although the node stayed active");
                }
            }
        }

        if (opt.operations)
        {
            for (const auto &op : extract_schedule(t).ops)
            {
                const int k = op_latency_budget(op.op);
                if (k == 0)
                {
                    continue;
                }
                const Time deadline = op.inv_t + k * d;
                if (op.resp)
                {
                    if (op.resp_t > deadline)
                    {
                        v.add({line_of(op.inv), line_of(*op.resp)},
                              op.op + " at node " + std::to_string(op.node) + " took longer than " + std::to_string(k) + "D");
                    }
                }
                else if (must_finish(op.node, op.inv_t, deadline))
                {
                    v.add({line_of(op.inv)}, op.op + " at node " + std::to_string(op.node) + " never completed although the node stayed active");
                }
            }
        }

        if (opt.scan_bound)
        {
            for (const auto &run : snapshot_notes(t).runs)
            {
                if (!run.end || !run.announced)
                {
                    continue;
                }
                const std::int64_t n = life.present_at(run.announced_t);
                if (static_cast<std::int64_t>(run.failed) > n + opt.scan_slack)
                {
                    v.add({line_of(*run.announced), line_of(*run.end)},
                          "scan at node " + std::to_string(run.node) + " had " + std::to_string(run.failed) +
                              " unsuccessful double collects, more than N(t) = " + std::to_string(n));
                }
            }
        }
        return v;
    }
}
