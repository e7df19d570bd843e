#pragma once

#include "common.hpp"

namespace ccc::check
{
    /// Interval specifications of the non-linearizable objects. A read must
    /// reflect every write that completed before it was invoked and may only
    /// reflect writes invoked before it responded.
    inline Verdict check_objects(const Schedule &s)
    {
        Verdict v;
        v.property = "objects";
        std::vector<const Operation *> writes;
        for (const auto &op : s.ops)
        {
            if (op.op == "writemax" || op.op == "abort" || op.op == "addset")
            {
                writes.push_back(&op);
            }
        }
        for (const auto &op : s.ops)
        {
            if (!op.resp)
            {
                continue;
            }
            if (op.op == "readmax")
            {
                const auto r = op.result.at("value").get<std::int64_t>();
                bool possible = r == 0;
                for (const auto *w : writes)
                {
                    if (w->op != "writemax")
                    {
                        continue;
                    }
                    const auto x = w->args.at("value").get<std::int64_t>();
                    if (w->precedes(op) && x > r)
                    {
                        v.add({line_of(*w->resp), line_of(*op.resp)}, "readmax returned " + std::to_string(r) + " below an earlier writemax");
                    }
                    if (w->inv < *op.resp && x == r)
                    {
                        possible = true;
                    }
                }
                if (!possible)
                {
                    v.add({line_of(*op.resp)}, "readmax returned a value no writemax invoked before it had written");
                }
            }
            else if (op.op == "check")
            {
                const bool r = op.result.at("value").get<bool>();
                bool must = false;
                bool may = false;
                for (const auto *w : writes)
                {
                    if (w->op == "abort")
                    {
                        must = must || w->precedes(op);
                        may = may || w->inv < *op.resp;
                    }
                }
                if (must && !r)
                {
                    v.add({line_of(*op.resp)}, "check returned false after a completed abort");
                }
                if (r && !may)
                {
                    v.add({line_of(*op.resp)}, "check returned true with no abort invoked");
                }
            }
            else if (op.op == "readset")
            {
                const auto r = op.result.at("value").get<std::set<std::int64_t>>();
                std::set<std::int64_t> must;
                std::set<std::int64_t> may;
                for (const auto *w : writes)
                {
                    if (w->op != "addset")
                    {
                        continue;
                    }
                    const auto x = w->args.at("value").get<std::int64_t>();
                    if (w->precedes(op))
                    {
                        must.insert(x);
                    }
                    if (w->inv < *op.resp)
                    {
                        may.insert(x);
                    }
                }
                for (auto x : must)
                {
                    if (!r.count(x))
                    {
                        v.add({line_of(*op.resp)}, "readset misses " + std::to_string(x) + " added before it began");
                    }
                }
                for (auto x : r)
                {
                    if (!may.count(x))
                    {
                        v.add({line_of(*op.resp)}, "readset returns " + std::to_string(x) + " which was never added");
                    }
                }
            }
        }
        return v;
    }

    inline Verdict check_objects(const Trace &t) { return check_objects(extract_schedule(t)); }
}
