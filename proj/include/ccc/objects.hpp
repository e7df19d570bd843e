#pragma once

#include "lattice.hpp"
#include "snapshot.hpp"

#include <set>
#include <stdexcept>
#include <string>
#include <variant>

namespace ccc
{
    enum class ObjectKind
    {
        store_collect,
        max_register,
        abort_flag,
        set,
        snapshot,
        lattice,
    };

    inline const char *to_string(ObjectKind k)
    {
        switch (k)
        {
        case ObjectKind::store_collect:
            return "store_collect";
        case ObjectKind::max_register:
            return "max_register";
        case ObjectKind::abort_flag:
            return "abort_flag";
        case ObjectKind::set:
            return "set";
        case ObjectKind::snapshot:
            return "snapshot";
        case ObjectKind::lattice:
            return "lattice";
        }
        return "?";
    }

    inline ObjectKind object_kind_from(const std::string &s)
    {
        for (auto k : {ObjectKind::store_collect, ObjectKind::max_register, ObjectKind::abort_flag, ObjectKind::set, ObjectKind::snapshot,
                       ObjectKind::lattice})
        {
            if (s == to_string(k))
            {
                return k;
            }
        }
        throw std::invalid_argument("unknown object kind: " + s);
    }

    /// Operation names accepted by each object kind.
    inline bool op_allowed(ObjectKind k, const std::string &op)
    {
        switch (k)
        {
        case ObjectKind::store_collect:
            return op == "store" || op == "collect";
        case ObjectKind::max_register:
            return op == "writemax" || op == "readmax";
        case ObjectKind::abort_flag:
            return op == "abort" || op == "check";
        case ObjectKind::set:
            return op == "addset" || op == "readset";
        case ObjectKind::snapshot:
            return op == "update" || op == "scan";
        case ObjectKind::lattice:
            return op == "propose";
        }
        return false;
    }

    struct DriverStep
    {
        std::optional<ScCall> call;
        std::optional<json> response;
    };

    inline DriverStep call_store(Value v) { return DriverStep{ScCall{OpType::store, std::move(v)}, std::nullopt}; }
    inline DriverStep call_collect() { return DriverStep{ScCall{OpType::collect, {}}, std::nullopt}; }
    inline DriverStep respond(json r) { return DriverStep{std::nullopt, std::move(r)}; }

    inline json ack() { return json{{"ack", true}}; }

    /// Store-collect operations passed straight through.
    struct PlainDriver
    {
        DriverStep invoke(const std::string &op, const json &args, Effects &)
        {
            if (op == "store")
            {
                return call_store(Value(args.at("value").dump()));
            }
            return call_collect();
        }

        DriverStep on_result(const ScResult &r, Effects &)
        {
            if (r.op == OpType::store)
            {
                return respond(ack());
            }
            json view = json::array();
            for (const auto &e : r.view.entries())
            {
                view.push_back(json::array({e.node, e.sqno, e.value.bytes()}));
            }
            return respond(json{{"view", std::move(view)}});
        }
    };

    /// writeMax stores the largest value this node has written, so a later
    /// smaller write cannot hide an earlier larger one; readMax returns the
    /// largest collected value, or 0.
    struct MaxRegisterDriver
    {
        std::optional<std::int64_t> local_max;

        DriverStep invoke(const std::string &op, const json &args, Effects &)
        {
            if (op == "writemax")
            {
                const auto v = args.at("value").get<std::int64_t>();
                local_max = local_max ? std::max(*local_max, v) : v;
                return call_store(Value(std::to_string(*local_max)));
            }
            return call_collect();
        }

        DriverStep on_result(const ScResult &r, Effects &)
        {
            if (r.op == OpType::store)
            {
                return respond(ack());
            }
            std::int64_t best = 0;
            bool any = false;
            for (const auto &e : r.view.entries())
            {
                const std::int64_t v = std::stoll(e.value.bytes());
                best = any ? std::max(best, v) : v;
                any = true;
            }
            return respond(json{{"value", any ? best : 0}});
        }
    };

    struct AbortFlagDriver
    {
        DriverStep invoke(const std::string &op, const json &, Effects &)
        {
            if (op == "abort")
            {
                return call_store(Value("true"));
            }
            return call_collect();
        }

        DriverStep on_result(const ScResult &r, Effects &)
        {
            if (r.op == OpType::store)
            {
                return respond(ack());
            }
            bool raised = false;
            for (const auto &e : r.view.entries())
            {
                raised = raised || e.value.bytes() == "true";
            }
            return respond(json{{"value", raised}});
        }
    };

    /// addSet stores the node's accumulated set; readSet unions every node's set.
    struct SetDriver
    {
        std::set<std::int64_t> lset;

        DriverStep invoke(const std::string &op, const json &args, Effects &)
        {
            if (op == "addset")
            {
                lset.insert(args.at("value").get<std::int64_t>());
                return call_store(Value(json(lset).dump()));
            }
            return call_collect();
        }

        DriverStep on_result(const ScResult &r, Effects &)
        {
            if (r.op == OpType::store)
            {
                return respond(ack());
            }
            std::set<std::int64_t> all;
            for (const auto &e : r.view.entries())
            {
                const auto part = json::parse(e.value.bytes()).get<std::set<std::int64_t>>();
                all.insert(part.begin(), part.end());
            }
            return respond(json{{"value", all}});
        }
    };

    inline json snapshot_result_json(const SnapshotView &v)
    {
        json arr = json::array();
        for (const auto &[n, val] : v)
        {
            arr.push_back(json::array({n, json::parse(val)}));
        }
        return arr;
    }

    struct SnapshotDriver
    {
        SnapshotMachine machine;

        DriverStep invoke(const std::string &op, const json &args, Effects &out)
        {
            if (op == "update")
            {
                return lift(machine.begin_update(args.at("value").dump(), out));
            }
            return lift(machine.begin_scan(out));
        }

        DriverStep on_result(const ScResult &r, Effects &out) { return lift(machine.on_result(r, out)); }

    private:
        static DriverStep lift(SnapshotMachine::Step s)
        {
            switch (s.done)
            {
            case SnapshotMachine::Done::update:
                return respond(ack());
            case SnapshotMachine::Done::scan:
                return respond(json{{"view", snapshot_result_json(s.view)}});
            case SnapshotMachine::Done::none:
                break;
            }
            return DriverStep{std::move(s.call), std::nullopt};
        }
    };

    /// Generalized lattice agreement over an atomic snapshot: join the input into
    /// the node's accumulated value, update, scan, return the join of the scan.
    template <JoinSemilattice L>
    struct LatticeDriver
    {
        SnapshotMachine machine;
        typename L::value_type val = L::bottom();

        DriverStep invoke(const std::string &, const json &args, Effects &out)
        {
            val = L::join(val, L::from_json(args.at("value")));
            return pass(machine.begin_update(L::to_json(val).dump(), out), out);
        }

        DriverStep on_result(const ScResult &r, Effects &out) { return pass(machine.on_result(r, out), out); }

    private:
        DriverStep pass(SnapshotMachine::Step s, Effects &out)
        {
            if (s.done == SnapshotMachine::Done::update)
            {
                return pass(machine.begin_scan(out), out);
            }
            if (s.done == SnapshotMachine::Done::scan)
            {
                typename L::value_type acc = L::bottom();
                for (const auto &entry : s.view)
                {
                    acc = L::join(acc, L::from_json(json::parse(entry.second)));
                }
                return respond(json{{"value", L::to_json(acc)}});
            }
            return DriverStep{std::move(s.call), std::nullopt};
        }
    };

    using ObjectState =
        std::variant<PlainDriver, MaxRegisterDriver, AbortFlagDriver, SetDriver, SnapshotDriver, LatticeDriver<SetLattice>, LatticeDriver<MaxLattice>>;

    inline ObjectState make_object(ObjectKind kind, LatticeKind lattice, NodeId self)
    {
        switch (kind)
        {
        case ObjectKind::store_collect:
            return PlainDriver{};
        case ObjectKind::max_register:
            return MaxRegisterDriver{};
        case ObjectKind::abort_flag:
            return AbortFlagDriver{};
        case ObjectKind::set:
            return SetDriver{};
        case ObjectKind::snapshot:
            return SnapshotDriver{SnapshotMachine(self)};
        case ObjectKind::lattice:
            if (lattice == LatticeKind::set)
            {
                return LatticeDriver<SetLattice>{SnapshotMachine(self)};
            }
            return LatticeDriver<MaxLattice>{SnapshotMachine(self)};
        }
        throw std::invalid_argument("bad object kind");
    }
}
