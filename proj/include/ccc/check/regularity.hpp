#pragma once

#include "common.hpp"

#include "../view.hpp"

namespace ccc::check
{
    /// A collected view as (node -> (sqno, value)).
    using CollectedView = std::map<NodeId, std::pair<Sqno, std::string>>;

    inline CollectedView collected_view(const json &result)
    {
        CollectedView v;
        for (const auto &e : result.at("view"))
        {
            v[e.at(0).get<NodeId>()] = {e.at(1).get<Sqno>(), e.at(2).get<std::string>()};
        }
        return v;
    }

    /// V1 ⪯ V2 with structural values: every node of V1 appears in V2 with a
    /// sequence number at least as large.
    inline bool view_leq(const CollectedView &a, const CollectedView &b)
    {
        for (const auto &[n, e] : a)
        {
            auto it = b.find(n);
            if (it == b.end() || it->second.first < e.first)
            {
                return false;
            }
        }
        return true;
    }

    namespace detail
    {
        /// Store operations per node in invocation order; the k-th store carries sqno k.
        inline std::map<NodeId, std::vector<const Operation *>> stores_by_node(const Schedule &s)
        {
            std::map<NodeId, std::vector<const Operation *>> out;
            for (const auto &op : s.ops)
            {
                if (op.op == "store")
                {
                    out[op.node].push_back(&op);
                }
            }
            return out;
        }

        inline const Operation *store_with_value(const std::vector<const Operation *> &stores, const std::string &value)
        {
            for (const auto *st : stores)
            {
                if (st->args.at("value").dump() == value)
                {
                    return st;
                }
            }
            return nullptr;
        }
    }

    /// The order on views defined through the schedule: for every ⟨p, a⟩ in v1
    /// there is ⟨p, b⟩ in v2 with a = b or Store_p(a) invoked no later than
    /// Store_p(b) responds.
    inline bool view_leq(const CollectedView &a, const CollectedView &b, const Schedule &s)
    {
        const auto stores = detail::stores_by_node(s);
        for (const auto &[n, ea] : a)
        {
            auto it = b.find(n);
            if (it == b.end())
            {
                return false;
            }
            if (it->second.second == ea.second)
            {
                continue;
            }
            auto sn = stores.find(n);
            if (sn == stores.end())
            {
                return false;
            }
            const auto *sa = detail::store_with_value(sn->second, ea.second);
            const auto *sb = detail::store_with_value(sn->second, it->second.second);
            if (!sa || !sb || !sb->resp || sa->inv > *sb->resp)
            {
                return false;
            }
        }
        return true;
    }

    /// Regularity of a store-collect schedule.
    /// Clause 1: a collect's entry for p names a store by p invoked before the
    /// collect responds, and no store by p that is invoked after it completes
    /// before the collect is invoked; an absent p means no store by p
    /// completed before the collect was invoked.
    /// Clause 2: a collect that precedes another returns a ⪯-smaller view.
    inline Verdict check_regularity(const Schedule &s)
    {
        Verdict v;
        v.property = "regularity";
        const auto stores = detail::stores_by_node(s);
        std::vector<std::pair<const Operation *, CollectedView>> collects;
        for (const auto &op : s.ops)
        {
            if (op.op == "collect" && op.resp)
            {
                collects.emplace_back(&op, collected_view(op.result));
            }
        }

        for (const auto &[c, view] : collects)
        {
            for (const auto &[p, list] : stores)
            {
                auto it = view.find(p);
                if (it == view.end())
                {
                    for (const auto *st : list)
                    {
                        if (st->precedes(*c))
                        {
                            v.add({line_of(*st->resp), line_of(c->inv), line_of(*c->resp)},
                                  "collect omits node " + std::to_string(p) + " although its store completed before the collect began");
                            break;
                        }
                    }
                    continue;
                }
                const auto [sqno, value] = it->second;
                if (sqno == 0 || sqno > list.size())
                {
                    v.add({line_of(*c->resp)}, "collect returns sqno " + std::to_string(sqno) + " for node " + std::to_string(p) +
                                                   " which has only " + std::to_string(list.size()) + " stores");
                    continue;
                }
                const auto *st = list[sqno - 1];
                if (st->args.at("value").dump() != value)
                {
                    v.add({line_of(st->inv), line_of(*c->resp)}, "collect returns a value for node " + std::to_string(p) + " never stored");
                    continue;
                }
                if (st->inv > *c->resp)
                {
                    v.add({line_of(st->inv), line_of(*c->resp)}, "collect returns a store invoked after the collect responded");
                    continue;
                }
                if (sqno < list.size() && list[sqno]->precedes(*c))
                {
                    v.add({line_of(*list[sqno]->resp), line_of(c->inv), line_of(*c->resp)},
                          "collect returns a stale value for node " + std::to_string(p) + ": a later store completed before the collect began");
                }
            }
            for (const auto &[p, e] : view)
            {
                if (!stores.count(p))
                {
                    v.add({line_of(*c->resp)}, "collect returns a value for node " + std::to_string(p) + " which never stored");
                }
            }
        }

        for (std::size_t i = 0; i < collects.size(); ++i)
        {
            for (std::size_t j = 0; j < collects.size(); ++j)
            {
                const auto *c1 = collects[i].first;
                const auto *c2 = collects[j].first;
                if (c1->precedes(*c2) && !view_leq(collects[i].second, collects[j].second))
                {
                    v.add({line_of(*c1->resp), line_of(*c2->resp)}, "collect views not monotone: an earlier collect saw a fresher value");
                }
            }
        }
        return v;
    }

    inline Verdict check_regularity(const Trace &t) { return check_regularity(extract_schedule(t)); }
}
