#pragma once

#include "common.hpp"

#include "../lattice.hpp"

namespace ccc::check
{
    /// Validity and Consistency of generalized lattice agreement over the
    /// propose operations of a schedule.
    template <JoinSemilattice L>
    Verdict check_lattice(const Schedule &s)
    {
        using V = typename L::value_type;
        Verdict v;
        v.property = "lattice";
        struct P
        {
            const Operation *op;
            V in;
            std::optional<V> out;
        };
        std::vector<P> ps;
        for (const auto &op : s.ops)
        {
            if (op.op != "propose")
            {
                continue;
            }
            P p{&op, L::from_json(op.args.at("value")), std::nullopt};
            if (op.resp)
            {
                p.out = L::from_json(op.result.at("value"));
            }
            ps.push_back(std::move(p));
        }

        for (std::size_t i = 0; i < ps.size(); ++i)
        {
            if (!ps[i].out)
            {
                continue;
            }
            const auto &w = *ps[i].out;
            const auto &op = *ps[i].op;
            if (!L::leq(ps[i].in, w))
            {
                v.add({line_of(op.inv), line_of(*op.resp)}, "output does not include the propose's own input");
            }
            // Join of every input proposed before this response that lies below w.
            V j = L::bottom();
            for (const auto &q : ps)
            {
                if (q.op->inv < *op.resp && L::leq(q.in, w))
                {
                    j = L::join(j, q.in);
                }
            }
            if (!(L::leq(w, j) && L::leq(j, w)))
            {
                v.add({line_of(*op.resp)}, "output is not a join of values proposed before the response");
            }
            for (const auto &q : ps)
            {
                if (q.out && q.op->precedes(op) && !L::leq(*q.out, w))
                {
                    v.add({line_of(*q.op->resp), line_of(*op.resp)}, "output omits a value returned before this propose was invoked");
                }
            }
            for (std::size_t k = i + 1; k < ps.size(); ++k)
            {
                if (ps[k].out && !L::leq(w, *ps[k].out) && !L::leq(*ps[k].out, w))
                {
                    v.add({line_of(*op.resp), line_of(*ps[k].op->resp)}, "outputs are incomparable");
                }
            }
        }
        return v;
    }

    inline Verdict check_lattice(const Trace &t)
    {
        const auto kind = lattice_kind_from(t.meta().value("lattice", std::string("set")));
        const auto s = extract_schedule(t);
        return with_lattice(kind, [&](auto tag) { return check_lattice<decltype(tag)>(s); });
    }
}
