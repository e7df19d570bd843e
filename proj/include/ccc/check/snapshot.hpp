#pragma once

#include "common.hpp"

#include <functional>
#include <limits>
#include <numeric>
#include <unordered_set>

namespace ccc::check
{
    using SnapValues = std::map<NodeId, std::string>;
    using UsqnoVector = std::map<NodeId, std::uint64_t>;

    /// One execution of the scan code (a Scan operation or the scan embedded in an Update).
    struct ScanRun
    {
        NodeId node = kNoNode;
        std::uint64_t ssqno = 0;
        bool embedded = false;
        std::size_t begin = 0;
        std::optional<std::size_t> announced;
        Time announced_t = 0;
        std::optional<std::size_t> end;
        bool direct = false;
        std::uint64_t failed = 0;
        SnapValues view;
        UsqnoVector usqno;                                // direct scans
        std::optional<std::pair<NodeId, std::uint64_t>> from; // borrowed scans
    };

    struct Publish
    {
        NodeId node = kNoNode;
        std::uint64_t usqno = 0;
        std::string val;
        std::size_t index = 0;
        std::optional<std::size_t> scan; // embedded scan run feeding this publish
    };

    struct SnapshotNotes
    {
        std::vector<ScanRun> runs;
        std::vector<Publish> publishes;
        std::map<std::pair<NodeId, std::uint64_t>, std::size_t> publish_by_key;
    };

    inline SnapValues snap_values(const json &view)
    {
        SnapValues v;
        for (const auto &e : view)
        {
            const auto &val = e.at(1);
            v[e.at(0).get<NodeId>()] = val.is_string() ? val.get<std::string>() : val.dump();
        }
        return v;
    }

    /// Scan results carry parsed values; notes carry the stored strings.
    inline SnapValues scan_result_values(const json &result)
    {
        SnapValues v;
        for (const auto &e : result.at("view"))
        {
            v[e.at(0).get<NodeId>()] = e.at(1).dump();
        }
        return v;
    }

    inline SnapshotNotes snapshot_notes(const Trace &t)
    {
        SnapshotNotes n;
        std::map<NodeId, std::size_t> open;
        std::map<NodeId, std::size_t> last_embedded;
        for (std::size_t i = 0; i < t.records.size(); ++i)
        {
            const auto &r = t.records[i];
            if (r.kind != RecordKind::note)
            {
                continue;
            }
            const json &d = r.data();
            const auto sub = d.value("sub", std::string());
            const auto event = d.value("event", std::string());
            if (sub == "scan" && event == "begin")
            {
                ScanRun run;
                run.node = r.node;
                run.ssqno = d.at("ssqno").get<std::uint64_t>();
                run.embedded = d.at("embedded").get<bool>();
                run.begin = i;
                open[r.node] = n.runs.size();
                n.runs.push_back(std::move(run));
            }
            else if (sub == "scan" && event == "announced")
            {
                auto &run = n.runs.at(open.at(r.node));
                run.announced = i;
                run.announced_t = r.t;
            }
            else if (sub == "scan" && event == "end")
            {
                const std::size_t idx = open.at(r.node);
                auto &run = n.runs[idx];
                run.end = i;
                run.failed = d.at("failed").get<std::uint64_t>();
                run.view = snap_values(d.at("view"));
                run.direct = d.at("mode").get<std::string>() == "direct";
                if (run.direct)
                {
                    for (const auto &e : d.at("usqno"))
                    {
                        run.usqno[e.at(0).get<NodeId>()] = e.at(1).get<std::uint64_t>();
                    }
                }
                else
                {
                    run.from = std::make_pair(d.at("from").at(0).get<NodeId>(), d.at("from").at(1).get<std::uint64_t>());
                }
                if (run.embedded)
                {
                    last_embedded[r.node] = idx;
                }
                open.erase(r.node);
            }
            else if (sub == "update" && event == "publish")
            {
                Publish p;
                p.node = r.node;
                p.usqno = d.at("usqno").get<std::uint64_t>();
                p.val = d.at("val").get<std::string>();
                p.index = i;
                if (auto it = last_embedded.find(r.node); it != last_embedded.end())
                {
                    p.scan = it->second;
                    last_embedded.erase(it);
                }
                n.publish_by_key[{p.node, p.usqno}] = n.publishes.size();
                n.publishes.push_back(std::move(p));
            }
        }
        return n;
    }

    inline bool usqno_leq(const UsqnoVector &a, const UsqnoVector &b)
    {
        for (const auto &[n, u] : a)
        {
            auto it = b.find(n);
            if (it == b.end() || it->second < u)
            {
                return false;
            }
        }
        return true;
    }

    inline std::uint64_t usqno_sum(const UsqnoVector &v)
    {
        return std::accumulate(v.begin(), v.end(), std::uint64_t{0}, [](std::uint64_t acc, const auto &e) { return acc + e.second; });
    }

    /// Follows a borrowed scan to the direct scan it ultimately copies.
    inline std::optional<std::size_t> borrow_root(const SnapshotNotes &n, std::size_t run)
    {
        std::size_t cur = run;
        for (std::size_t guard = 0; guard <= n.runs.size(); ++guard)
        {
            const auto &r = n.runs[cur];
            if (r.direct)
            {
                return cur;
            }
            if (!r.from)
            {
                return std::nullopt;
            }
            auto it = n.publish_by_key.find(*r.from);
            if (it == n.publish_by_key.end() || !n.publishes[it->second].scan)
            {
                return std::nullopt;
            }
            cur = *n.publishes[it->second].scan;
        }
        return std::nullopt;
    }

    /// Any two direct scans return ⪯-comparable views (compared on usqnos).
    inline Verdict check_direct_scan_comparability(const SnapshotNotes &n)
    {
        Verdict v;
        v.property = "direct-scan-comparability";
        std::vector<std::size_t> direct;
        for (std::size_t i = 0; i < n.runs.size(); ++i)
        {
            if (n.runs[i].end && n.runs[i].direct)
            {
                direct.push_back(i);
            }
        }
        std::stable_sort(direct.begin(), direct.end(),
                         [&](std::size_t a, std::size_t b) { return usqno_sum(n.runs[a].usqno) < usqno_sum(n.runs[b].usqno); });
        // A chain under ⪯ sorted by total is pairwise comparable iff consecutive pairs are.
        for (std::size_t k = 1; k < direct.size(); ++k)
        {
            const auto &a = n.runs[direct[k - 1]];
            const auto &b = n.runs[direct[k]];
            if (!usqno_leq(a.usqno, b.usqno))
            {
                v.add({line_of(*a.end), line_of(*b.end)}, "direct scans by nodes " + std::to_string(a.node) + " and " + std::to_string(b.node) +
                                                              " returned incomparable views");
            }
        }
        return v;
    }

    /// The direct scan a borrowed scan ultimately copies starts after the
    /// borrower starts and completes before the borrower completes.
    inline Verdict check_borrowed_scan_containment(const SnapshotNotes &n)
    {
        Verdict v;
        v.property = "borrowed-scan-containment";
        for (std::size_t i = 0; i < n.runs.size(); ++i)
        {
            const auto &r = n.runs[i];
            if (!r.end || r.direct)
            {
                continue;
            }
            const auto root = borrow_root(n, i);
            if (!root)
            {
                v.add({line_of(*r.end)}, "borrowed scan by node " + std::to_string(r.node) + " has no traceable direct source");
                continue;
            }
            const auto &d = n.runs[*root];
            if (!(d.begin > r.begin && *d.end < *r.end))
            {
                v.add({line_of(r.begin), line_of(*r.end), line_of(d.begin), line_of(*d.end)},
                      "borrowed scan by node " + std::to_string(r.node) + " copies a direct scan not contained in its interval");
            }
            if (d.view != r.view)
            {
                v.add({line_of(*r.end), line_of(*d.end)}, "borrowed scan result differs from its direct source");
            }
        }
        return v;
    }

    // ---- linearizability ------------------------------------------------

    struct SnapOp
    {
        NodeId node = kNoNode;
        bool update = false;
        std::string value;  // update argument
        SnapValues view;    // scan result
        std::size_t inv = 0;
        std::optional<std::size_t> resp;
        bool optional_pending = false; // pending update that may or may not take effect

        bool precedes(const SnapOp &o) const { return resp && *resp < o.inv; }
    };

    /// Snapshot history of a trace: completed updates and scans plus pending
    /// updates whose final store started (they may be linearized or dropped).
    inline std::vector<SnapOp> snapshot_history(const Trace &t, const Schedule &s, const SnapshotNotes &n)
    {
        std::map<NodeId, std::vector<std::size_t>> publish_at;
        for (const auto &p : n.publishes)
        {
            publish_at[p.node].push_back(p.index);
        }
        std::vector<SnapOp> h;
        for (const auto &op : s.ops)
        {
            if (op.op != "update" && op.op != "scan")
            {
                continue;
            }
            SnapOp so;
            so.node = op.node;
            so.update = op.op == "update";
            so.inv = op.inv;
            so.resp = op.resp;
            if (so.update)
            {
                so.value = op.args.at("value").dump();
                if (!op.resp)
                {
                    const auto &idx = publish_at[op.node];
                    const bool started = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return i > op.inv; });
                    if (!started)
                    {
                        continue;
                    }
                    so.optional_pending = true;
                }
            }
            else
            {
                if (!op.resp)
                {
                    continue;
                }
                so.view = scan_result_values(op.result);
            }
            h.push_back(std::move(so));
        }
        (void)t;
        return h;
    }

    /// Exhaustive backtracking search for a legal sequential order extending
    /// real-time order, memoizing explored frontiers. Returns nullopt when
    /// the history exceeds the budget.
    inline std::optional<bool> snapshot_linearizable_exhaustive(const std::vector<SnapOp> &h, std::size_t budget = 12)
    {
        const std::size_t n = h.size();
        if (n > budget || n > 30)
        {
            return std::nullopt;
        }
        std::uint32_t required = 0;
        std::vector<std::uint32_t> preds(n, 0);
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!h[i].optional_pending)
            {
                required |= 1u << i;
            }
            for (std::size_t j = 0; j < n; ++j)
            {
                if (j != i && h[j].precedes(h[i]))
                {
                    preds[i] |= 1u << j;
                }
            }
        }
        std::unordered_set<std::uint32_t> dead;
        std::function<bool(std::uint32_t)> dfs = [&](std::uint32_t mask) -> bool {
            if ((mask & required) == required)
            {
                return true;
            }
            if (dead.count(mask))
            {
                return false;
            }
            // Current state: each node's latest linearized update (a node's updates are real-time ordered).
            SnapValues state;
            std::map<NodeId, std::size_t> latest;
            for (std::size_t k = 0; k < n; ++k)
            {
                if ((mask >> k & 1u) && h[k].update)
                {
                    auto it = latest.find(h[k].node);
                    if (it == latest.end() || h[it->second].inv < h[k].inv)
                    {
                        latest[h[k].node] = k;
                    }
                }
            }
            for (const auto &[node, k] : latest)
            {
                state[node] = h[k].value;
            }
            for (std::size_t i = 0; i < n; ++i)
            {
                if ((mask >> i & 1u) || (preds[i] & ~mask) != 0)
                {
                    continue;
                }
                if (!h[i].update && h[i].view != state)
                {
                    continue;
                }
                if (dfs(mask | (1u << i)))
                {
                    return true;
                }
            }
            dead.insert(mask);
            return false;
        };
        return dfs(0);
    }

    namespace detail
    {
        struct ConstructiveResult
        {
            bool ok = true;
            std::vector<Violation> problems;
        };

        /// Orders direct scans by ⪯, puts each borrowed scan with the direct
        /// scan it copies, inserts each update just before the first scan that
        /// observes it, then validates the sequence against the sequential
        /// specification and real-time order.
        inline ConstructiveResult constructive_linearization(const Schedule &s, const SnapshotNotes &n)
        {
            ConstructiveResult res;
            auto fail = [&](std::vector<std::size_t> lines, std::string why) {
                res.ok = false;
                res.problems.push_back({std::move(lines), std::move(why)});
            };

            struct Item
            {
                bool update;
                NodeId node;
                std::uint64_t usqno = 0; // updates
                std::string value;
                SnapValues view; // scans
                UsqnoVector key; // scans
                std::size_t inv;
                std::optional<std::size_t> resp;
            };
            std::vector<Item> updates;
            std::vector<Item> scans;

            std::map<NodeId, std::vector<std::size_t>> runs_by_node;
            for (std::size_t i = 0; i < n.runs.size(); ++i)
            {
                runs_by_node[n.runs[i].node].push_back(i);
            }
            std::map<NodeId, std::vector<const Publish *>> pubs_by_node;
            for (const auto &p : n.publishes)
            {
                pubs_by_node[p.node].push_back(&p);
            }

            for (const auto &op : s.ops)
            {
                const std::size_t end = op.resp ? *op.resp : std::numeric_limits<std::size_t>::max();
                if (op.op == "update")
                {
                    const Publish *pub = nullptr;
                    for (const auto *p : pubs_by_node[op.node])
                    {
                        if (p->index > op.inv && p->index < end)
                        {
                            pub = p;
                            break;
                        }
                    }
                    if (!pub)
                    {
                        if (op.resp)
                        {
                            fail({line_of(op.inv)}, "completed update has no publish record");
                        }
                        continue;
                    }
                    updates.push_back(Item{true, op.node, pub->usqno, pub->val, {}, {}, op.inv, op.resp});
                }
                else if (op.op == "scan" && op.resp)
                {
                    std::optional<std::size_t> run;
                    for (std::size_t ri : runs_by_node[op.node])
                    {
                        const auto &r = n.runs[ri];
                        if (!r.embedded && r.begin > op.inv && r.end && *r.end < end)
                        {
                            run = ri;
                            break;
                        }
                    }
                    if (!run)
                    {
                        fail({line_of(op.inv)}, "scan has no scan record");
                        continue;
                    }
                    const auto root = borrow_root(n, *run);
                    if (!root)
                    {
                        fail({line_of(*op.resp)}, "scan borrows from an untraceable source");
                        continue;
                    }
                    scans.push_back(Item{false, op.node, 0, {}, scan_result_values(op.result), n.runs[*root].usqno, op.inv, op.resp});
                }
            }
            if (!res.ok)
            {
                return res;
            }

            std::stable_sort(scans.begin(), scans.end(), [](const Item &a, const Item &b) {
                const auto sa = usqno_sum(a.key);
                const auto sb = usqno_sum(b.key);
                return sa != sb ? sa < sb : a.inv < b.inv;
            });
            for (std::size_t k = 1; k < scans.size(); ++k)
            {
                if (!usqno_leq(scans[k - 1].key, scans[k].key))
                {
                    fail({line_of(*scans[k - 1].resp), line_of(*scans[k].resp)}, "scan views are not totally ordered");
                    return res;
                }
            }
            // Group scans with equal keys; inside a group order by invocation.
            std::vector<std::vector<std::size_t>> groups;
            for (std::size_t k = 0; k < scans.size(); ++k)
            {
                if (groups.empty() || scans[groups.back().front()].key != scans[k].key)
                {
                    groups.emplace_back();
                }
                groups.back().push_back(k);
            }
            for (auto &g : groups)
            {
                std::sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return scans[a].inv < scans[b].inv; });
            }
            std::vector<std::vector<std::size_t>> before(groups.size() + 1);
            for (std::size_t u = 0; u < updates.size(); ++u)
            {
                std::size_t g = 0;
                for (; g < groups.size(); ++g)
                {
                    const auto &key = scans[groups[g].front()].key;
                    auto it = key.find(updates[u].node);
                    if (it != key.end() && it->second >= updates[u].usqno)
                    {
                        break;
                    }
                }
                if (g == groups.size() && !updates[u].resp)
                {
                    continue; // unobserved pending update: never takes effect
                }
                before[g].push_back(u);
            }
            for (auto &b : before)
            {
                std::sort(b.begin(), b.end(), [&](std::size_t a, std::size_t c) { return updates[a].inv < updates[c].inv; });
            }
            std::vector<const Item *> order;
            for (std::size_t g = 0; g <= groups.size(); ++g)
            {
                for (std::size_t u : before[g])
                {
                    order.push_back(&updates[u]);
                }
                if (g < groups.size())
                {
                    for (std::size_t k : groups[g])
                    {
                        order.push_back(&scans[k]);
                    }
                }
            }

            SnapValues state;
            for (const auto *it : order)
            {
                if (it->update)
                {
                    state[it->node] = it->value;
                }
                else if (it->view != state)
                {
                    fail({line_of(*it->resp)}, "scan result differs from the state at its linearization point");
                }
            }
            for (std::size_t a = 0; a < order.size(); ++a)
            {
                for (std::size_t b = 0; b < a; ++b)
                {
                    // order[b] is placed first; that contradicts real time if order[a] responded before order[b] began.
                    if (order[a]->resp && *order[a]->resp < order[b]->inv)
                    {
                        fail({line_of(*order[a]->resp), line_of(order[b]->inv)}, "linearization order contradicts real-time order");
                    }
                }
            }
            return res;
        }
    }

    inline Verdict check_snapshot_constructive(const Trace &t)
    {
        Verdict v;
        v.property = "snapshot-constructive";
        const auto r = detail::constructive_linearization(extract_schedule(t), snapshot_notes(t));
        v.violations = r.problems;
        return v;
    }

    /// Exhaustive search when the history fits the budget; otherwise the
    /// constructive linearization is validated and the verdict says so.
    inline Verdict check_snapshot_linearizable(const Trace &t, std::size_t budget = 12)
    {
        Verdict v;
        v.property = "snapshot-linearizable";
        const auto sched = extract_schedule(t);
        const auto notes = snapshot_notes(t);
        const auto h = snapshot_history(t, sched, notes);
        if (const auto ex = snapshot_linearizable_exhaustive(h, budget))
        {
            v.note = "exhaustive";
            if (!*ex)
            {
                v.add({}, "no legal sequential order extends the real-time order (" + std::to_string(h.size()) + " operations)");
            }
            return v;
        }
        const auto r = detail::constructive_linearization(sched, notes);
        v.note = std::string("inconclusive-exhaustive, constructive-") + (r.ok ? "pass" : "fail");
        v.violations = r.problems;
        return v;
    }

    inline Verdict check_snapshot_linearizable(const std::vector<SnapOp> &h, std::size_t budget = 12)
    {
        Verdict v;
        v.property = "snapshot-linearizable";
        const auto ex = snapshot_linearizable_exhaustive(h, budget);
        if (!ex)
        {
            v.inconclusive = true;
            v.note = "inconclusive-exhaustive: history exceeds budget";
            return v;
        }
        v.note = "exhaustive";
        if (!*ex)
        {
            v.add({}, "no legal sequential order extends the real-time order");
        }
        return v;
    }
}
