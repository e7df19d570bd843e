#pragma once

#include "node.hpp"
#include "params.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ccc
{
    enum class DelayModel
    {
        uniform,
        fixed,
        adversarial,
        skewed, // each directed link is fast (<= D/10) or slow (>= 9D/10) for the whole run
    };

    inline const char *to_string(DelayModel m)
    {
        switch (m)
        {
        case DelayModel::uniform:
            return "uniform";
        case DelayModel::fixed:
            return "fixed";
        case DelayModel::adversarial:
            return "adversarial";
        case DelayModel::skewed:
            return "skewed";
        }
        return "?";
    }

    struct DelaySpec
    {
        DelayModel model = DelayModel::uniform;
        Time fixed = 0; // used when model == fixed
    };

    enum class ChurnKind
    {
        enter,
        leave,
        crash,
    };

    inline const char *to_string(ChurnKind k)
    {
        switch (k)
        {
        case ChurnKind::enter:
            return "enter";
        case ChurnKind::leave:
            return "leave";
        case ChurnKind::crash:
            return "crash";
        }
        return "?";
    }

    inline ChurnKind churn_kind_from(const std::string &s)
    {
        if (s == "enter")
        {
            return ChurnKind::enter;
        }
        if (s == "leave")
        {
            return ChurnKind::leave;
        }
        if (s == "crash")
        {
            return ChurnKind::crash;
        }
        throw std::invalid_argument("unknown churn kind: " + s);
    }

    struct ChurnDirective
    {
        Time t = 0;
        ChurnKind kind = ChurnKind::enter;
        NodeId node = kNoNode;
    };

    struct WorkloadEntry
    {
        Time t = 0;
        NodeId node = kNoNode;
        std::string op;
        json args = json::object();
    };

    /// Closed-loop random workload: every joined node issues operations one
    /// after another, with a think time in [1, think_max] ticks between a
    /// response and the next invocation, until `ops` invocations in total.
    struct RandomWorkload
    {
        std::int64_t ops = 0;
        Time think_max = kTicksPerUnit / 2;
        std::vector<std::string> mix; // empty: every op of the object kind
        std::int64_t value_range = 1000;
    };

    using Workload = std::variant<std::vector<WorkloadEntry>, RandomWorkload>;

    enum class CrashAdversary
    {
        random_subset,
        none_delivered,
    };

    struct Scenario
    {
        ModelParams params;
        std::set<NodeId> initial_nodes;
        std::vector<ChurnDirective> churn;
        Workload workload = std::vector<WorkloadEntry>{};
        DelaySpec delay;
        std::uint64_t seed = 0;
        Time horizon = 10 * kTicksPerUnit;
        ObjectKind object = ObjectKind::store_collect;
        LatticeKind lattice = LatticeKind::set;
        CrashAdversary adversary = CrashAdversary::random_subset;
        Mutations mutations;
        bool record_state = true;

        ProtocolConfig protocol_config() const
        {
            ProtocolConfig c;
            c.alpha = params.alpha;
            c.delta = params.delta;
            c.gamma = Ratio::from(params.gamma);
            c.beta = Ratio::from(params.beta);
            c.object = object;
            c.lattice = lattice;
            c.mutations = mutations;
            return c;
        }
    };

    inline std::vector<std::string> default_ops(ObjectKind k)
    {
        switch (k)
        {
        case ObjectKind::store_collect:
            return {"store", "collect"};
        case ObjectKind::max_register:
            return {"writemax", "readmax"};
        case ObjectKind::abort_flag:
            return {"abort", "check"};
        case ObjectKind::set:
            return {"addset", "readset"};
        case ObjectKind::snapshot:
            return {"update", "scan"};
        case ObjectKind::lattice:
            return {"propose"};
        }
        return {};
    }

    // ---- JSON codec -----------------------------------------------------

    namespace detail
    {
        inline Rational json_rational(const json &j)
        {
            if (j.is_string())
            {
                return parse_decimal(j.get<std::string>());
            }
            if (j.is_number_integer())
            {
                return Rational(j.get<std::int64_t>());
            }
            return rational_from_double(j.get<double>());
        }

        inline Time json_time(const json &j, Time unit)
        {
            const Rational ticks = json_rational(j) * unit;
            const Rational rounded = Rational(boost::multiprecision::cpp_int(ticks + Rational(1, 2)));
            return static_cast<Time>(boost::multiprecision::numerator(rounded).convert_to<std::int64_t>());
        }

        inline json time_json(Time t, Time unit)
        {
            if (t % unit == 0)
            {
                return json(t / unit);
            }
            return json(static_cast<double>(t) / static_cast<double>(unit));
        }

        inline json rational_json(const Rational &r)
        {
            if (boost::multiprecision::denominator(r) == 1)
            {
                return json(boost::multiprecision::numerator(r).convert_to<std::int64_t>());
            }
            return json(to_double(r));
        }
    }

    /// Times in scenario files are in model time units (D = 1 by default).
    inline Scenario scenario_from_json(const json &j)
    {
        using detail::json_rational;
        using detail::json_time;
        Scenario s;
        if (j.contains("params"))
        {
            const json &p = j.at("params");
            if (p.contains("alpha"))
            {
                s.params.alpha = json_rational(p.at("alpha"));
            }
            if (p.contains("delta"))
            {
                s.params.delta = json_rational(p.at("delta"));
            }
            if (p.contains("gamma"))
            {
                s.params.gamma = json_rational(p.at("gamma"));
            }
            if (p.contains("beta"))
            {
                s.params.beta = json_rational(p.at("beta"));
            }
            if (p.contains("n_min"))
            {
                s.params.n_min = p.at("n_min").get<std::int64_t>();
            }
            if (p.contains("d"))
            {
                s.params.d = json_time(p.at("d"), kTicksPerUnit);
            }
        }
        for (const auto &n : j.at("initial_nodes"))
        {
            s.initial_nodes.insert(n.get<NodeId>());
        }
        if (j.contains("churn"))
        {
            for (const auto &c : j.at("churn"))
            {
                s.churn.push_back({json_time(c.at("t"), kTicksPerUnit), churn_kind_from(c.at("kind").get<std::string>()), c.at("node").get<NodeId>()});
            }
        }
        if (j.contains("object"))
        {
            s.object = object_kind_from(j.at("object").get<std::string>());
        }
        if (j.contains("lattice"))
        {
            s.lattice = lattice_kind_from(j.at("lattice").get<std::string>());
        }
        if (j.contains("workload"))
        {
            const json &w = j.at("workload");
            if (w.is_object() && w.contains("random"))
            {
                const json &r = w.at("random");
                RandomWorkload rw;
                rw.ops = r.value("ops", std::int64_t{0});
                if (r.contains("think_max"))
                {
                    rw.think_max = json_time(r.at("think_max"), kTicksPerUnit);
                }
                if (r.contains("mix"))
                {
                    rw.mix = r.at("mix").get<std::vector<std::string>>();
                }
                rw.value_range = r.value("value_range", std::int64_t{1000});
                s.workload = std::move(rw);
            }
            else
            {
                std::vector<WorkloadEntry> entries;
                for (const auto &e : w)
                {
                    entries.push_back({json_time(e.at("t"), kTicksPerUnit), e.at("node").get<NodeId>(), e.at("op").get<std::string>(),
                                       e.value("args", json::object())});
                }
                s.workload = std::move(entries);
            }
        }
        if (j.contains("delay_model"))
        {
            const json &d = j.at("delay_model");
            if (d.is_string())
            {
                const auto name = d.get<std::string>();
                if (name == "uniform")
                {
                    s.delay.model = DelayModel::uniform;
                }
                else if (name == "adversarial" || name == "adversarial-max")
                {
                    s.delay.model = DelayModel::adversarial;
                }
                else if (name == "skewed")
                {
                    s.delay.model = DelayModel::skewed;
                }
                else
                {
                    throw std::invalid_argument("unknown delay model: " + name);
                }
            }
            else
            {
                s.delay.model = DelayModel::fixed;
                s.delay.fixed = json_time(d.at("fixed"), kTicksPerUnit);
            }
        }
        s.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("horizon"))
        {
            s.horizon = json_time(j.at("horizon"), kTicksPerUnit);
        }
        if (j.contains("adversary"))
        {
            const auto a = j.at("adversary").get<std::string>();
            if (a == "none-delivered")
            {
                s.adversary = CrashAdversary::none_delivered;
            }
            else if (a == "random")
            {
                s.adversary = CrashAdversary::random_subset;
            }
            else
            {
                throw std::invalid_argument("unknown adversary: " + a);
            }
        }
        if (j.contains("mutation"))
        {
            const auto m = j.at("mutation").get<std::string>();
            if (m == "drop_store_echo")
            {
                s.mutations.drop_store_echo = true;
            }
            else if (m == "skip_store_back")
            {
                s.mutations.skip_store_back = true;
            }
            else if (m != "none")
            {
                throw std::invalid_argument("unknown mutation: " + m);
            }
        }
        s.record_state = j.value("record_state", true);
        return s;
    }

    inline json scenario_to_json(const Scenario &s)
    {
        using detail::rational_json;
        using detail::time_json;
        const Time u = kTicksPerUnit;
        json j;
        j["params"] = json{{"alpha", rational_json(s.params.alpha)},
                           {"delta", rational_json(s.params.delta)},
                           {"gamma", rational_json(s.params.gamma)},
                           {"beta", rational_json(s.params.beta)},
                           {"n_min", s.params.n_min},
                           {"d", time_json(s.params.d, u)}};
        j["initial_nodes"] = s.initial_nodes;
        json churn = json::array();
        for (const auto &c : s.churn)
        {
            churn.push_back(json{{"t", time_json(c.t, u)}, {"kind", to_string(c.kind)}, {"node", c.node}});
        }
        j["churn"] = std::move(churn);
        if (const auto *entries = std::get_if<std::vector<WorkloadEntry>>(&s.workload))
        {
            json w = json::array();
            for (const auto &e : *entries)
            {
                w.push_back(json{{"t", time_json(e.t, u)}, {"node", e.node}, {"op", e.op}, {"args", e.args}});
            }
            j["workload"] = std::move(w);
        }
        else
        {
            const auto &r = std::get<RandomWorkload>(s.workload);
            j["workload"] = json{{"random", {{"ops", r.ops}, {"think_max", time_json(r.think_max, u)}, {"mix", r.mix}, {"value_range", r.value_range}}}};
        }
        if (s.delay.model == DelayModel::fixed)
        {
            j["delay_model"] = json{{"fixed", time_json(s.delay.fixed, u)}};
        }
        else
        {
            j["delay_model"] = to_string(s.delay.model);
        }
        j["seed"] = s.seed;
        j["horizon"] = time_json(s.horizon, u);
        j["object"] = to_string(s.object);
        j["lattice"] = to_string(s.lattice);
        j["adversary"] = s.adversary == CrashAdversary::none_delivered ? "none-delivered" : "random";
        j["mutation"] = s.mutations.drop_store_echo ? "drop_store_echo" : s.mutations.skip_store_back ? "skip_store_back" : "none";
        j["record_state"] = s.record_state;
        return j;
    }

    // ---- validation -----------------------------------------------------

    struct ValidationIssue
    {
        std::string kind; // structure, churn, min-size, failure-fraction, lemma-changing-size, lemma-max-leave, workload, params
        Time t = 0;
        std::string detail;
    };

    struct ValidationReport
    {
        std::vector<ValidationIssue> issues;

        bool ok() const { return issues.empty(); }

        json to_json() const
        {
            json arr = json::array();
            for (const auto &i : issues)
            {
                arr.push_back(json{{"kind", i.kind}, {"t", i.t}, {"detail", i.detail}});
            }
            return json{{"ok", ok()}, {"issues", std::move(arr)}};
        }
    };

    namespace detail
    {
        /// Membership timeline of a churn schedule: N(t) counts present nodes
        /// (entered, not left; crashed nodes stay present), C(t) crashed nodes.
        struct Timeline
        {
            struct Point
            {
                Time t;
                std::int64_t n;
                std::int64_t crashed;
            };
            std::vector<Point> points; // value after all events at points[i].t
            std::vector<Time> churn_times;  // enter and leave
            std::vector<Time> leave_times;

            /// Value after every event at times <= t.
            const Point &at(Time t) const
            {
                auto it = std::upper_bound(points.begin(), points.end(), t, [](Time x, const Point &p) { return x < p.t; });
                return *(it - 1);
            }

            static std::int64_t count_in(const std::vector<Time> &v, Time lo, bool lo_open, Time hi)
            {
                auto b = lo_open ? std::upper_bound(v.begin(), v.end(), lo) : std::lower_bound(v.begin(), v.end(), lo);
                auto e = std::upper_bound(v.begin(), v.end(), hi);
                return e > b ? e - b : 0;
            }
        };

        inline std::vector<ChurnDirective> sorted_churn(const std::vector<ChurnDirective> &churn)
        {
            std::vector<ChurnDirective> c = churn;
            std::stable_sort(c.begin(), c.end(), [](const ChurnDirective &a, const ChurnDirective &b) { return a.t < b.t; });
            return c;
        }

        inline Timeline build_timeline(const Scenario &s)
        {
            Timeline tl;
            std::int64_t n = static_cast<std::int64_t>(s.initial_nodes.size());
            std::int64_t crashed = 0;
            tl.points.push_back({0, n, 0});
            for (const auto &c : sorted_churn(s.churn))
            {
                if (c.kind == ChurnKind::enter)
                {
                    ++n;
                    tl.churn_times.push_back(c.t);
                }
                else if (c.kind == ChurnKind::leave)
                {
                    --n;
                    tl.churn_times.push_back(c.t);
                    tl.leave_times.push_back(c.t);
                }
                else
                {
                    ++crashed;
                }
                if (tl.points.back().t == c.t)
                {
                    tl.points.back() = {c.t, n, crashed};
                }
                else
                {
                    tl.points.push_back({c.t, n, crashed});
                }
            }
            return tl;
        }

        inline std::string rstr(const Rational &r) { return to_decimal_string(r); }
    }

    /// Checks the schedule against the model assumptions and the derived
    /// lemma bounds on system size and departures. Never throws on a merely
    /// violating schedule.
    inline ValidationReport validate_scenario(const Scenario &s)
    {
        ValidationReport rep;
        auto issue = [&](std::string kind, Time t, std::string detail) { rep.issues.push_back({std::move(kind), t, std::move(detail)}); };

        for (const auto &e : s.params.range_errors())
        {
            issue("params", 0, e);
        }
        if (s.initial_nodes.empty())
        {
            issue("structure", 0, "initial node set is empty");
        }
        if (s.horizon <= 0)
        {
            issue("structure", 0, "horizon must be positive");
        }

        // Per-node lifecycle: enter once (never for S0), then at most one of leave/crash.
        const auto churn = detail::sorted_churn(s.churn);
        std::map<NodeId, int> phase; // 1 present, 2 crashed, 3 left
        for (NodeId n : s.initial_nodes)
        {
            phase[n] = 1;
        }
        bool structural = true;
        for (const auto &c : churn)
        {
            if (c.t < 0)
            {
                issue("structure", c.t, "negative event time");
                structural = false;
            }
            auto it = phase.find(c.node);
            const int cur = it == phase.end() ? 0 : it->second;
            if (c.kind == ChurnKind::enter)
            {
                if (cur != 0)
                {
                    issue("structure", c.t, "node " + std::to_string(c.node) + " enters twice");
                    structural = false;
                }
                phase[c.node] = 1;
            }
            else
            {
                if (cur != 1)
                {
                    issue("structure", c.t, "node " + std::to_string(c.node) + " " + to_string(c.kind) + " while not active");
                    structural = false;
                }
                phase[c.node] = c.kind == ChurnKind::crash ? 2 : 3;
            }
        }
        if (!structural)
        {
            return rep;
        }

        // Model assumptions, checked at every breakpoint of the piecewise-constant counts.
        const auto tl = detail::build_timeline(s);
        const Time d = s.params.d;
        std::set<Time> probes{0};
        for (const auto &p : tl.points)
        {
            for (Time base : {p.t, p.t - d, p.t - 2 * d, p.t - 3 * d})
            {
                for (Time off : {Time{-1}, Time{0}, Time{1}})
                {
                    if (base + off >= 0)
                    {
                        probes.insert(base + off);
                    }
                }
            }
        }
        bool churn_reported = false;
        bool size_reported = false;
        bool crash_reported = false;
        for (Time t : probes)
        {
            const auto &pt = tl.at(t);
            const Rational n(pt.n);
            const auto in_window = detail::Timeline::count_in(tl.churn_times, t, false, t + d);
            if (!churn_reported && Rational(in_window) > s.params.alpha * n)
            {
                issue("churn", t,
                      std::to_string(in_window) + " enter/leave events in [t, t+D] exceed alpha*N(t) = " + detail::rstr(s.params.alpha * n));
                churn_reported = true;
            }
            if (!size_reported && pt.n < s.params.n_min)
            {
                issue("min-size", t, "N(t) = " + std::to_string(pt.n) + " below n_min = " + std::to_string(s.params.n_min));
                size_reported = true;
            }
            if (!crash_reported && Rational(pt.crashed) > s.params.delta * n)
            {
                issue("failure-fraction", t,
                      std::to_string(pt.crashed) + " crashed nodes exceed delta*N(t) = " + detail::rstr(s.params.delta * n));
                crash_reported = true;
            }
            for (int i = 1; i <= 3; ++i)
            {
                const Rational grow = detail::rpow(1 + s.params.alpha, i) * n;
                const auto later = tl.at(t + i * d).n;
                if (Rational(later) > grow)
                {
                    issue("lemma-changing-size", t,
                          "N(t+" + std::to_string(i) + "D) = " + std::to_string(later) + " exceeds (1+alpha)^" + std::to_string(i) + "*N(t)");
                }
                const Rational leave_cap = (1 - detail::rpow(1 - s.params.alpha, i)) * n;
                const auto leaves = detail::Timeline::count_in(tl.leave_times, t, true, t + i * d);
                if (Rational(leaves) > leave_cap)
                {
                    issue("lemma-max-leave", t,
                          std::to_string(leaves) + " leaves in (t, t+" + std::to_string(i) + "D] exceed (1-(1-alpha)^" + std::to_string(i) +
                              ")*N(t)");
                }
            }
        }

        // Workload: op names must match the object; explicit entries must be well-formed per node.
        const auto ops = default_ops(s.object);
        auto op_known = [&](const std::string &op) { return op_allowed(s.object, op); };
        if (const auto *entries = std::get_if<std::vector<WorkloadEntry>>(&s.workload))
        {
            for (const auto &e : *entries)
            {
                if (!op_known(e.op))
                {
                    issue("workload", e.t, "operation '" + e.op + "' not supported by " + to_string(s.object));
                }
            }
        }
        else
        {
            const auto &r = std::get<RandomWorkload>(s.workload);
            for (const auto &op : r.mix)
            {
                if (!op_known(op))
                {
                    issue("workload", 0, "operation '" + op + "' not supported by " + to_string(s.object));
                }
            }
            if (r.think_max < 1)
            {
                issue("workload", 0, "think_max must be positive");
            }
        }
        if (s.delay.model == DelayModel::fixed && (s.delay.fixed < 1 || s.delay.fixed > d))
        {
            issue("params", 0, "fixed delay must be in (0, D]");
        }
        return rep;
    }

    // ---- random generation ----------------------------------------------

    struct RandomSpec
    {
        std::uint64_t seed = 1;
        std::int64_t nodes_lo = 5;
        std::int64_t nodes_hi = 20;
        std::int64_t ops_lo = 1;
        std::int64_t ops_hi = 100;
        Time horizon = 60 * kTicksPerUnit;
        ModelParams params;
        ObjectKind object = ObjectKind::store_collect;
        LatticeKind lattice = LatticeKind::set;
        std::optional<DelayModel> delay; // nullopt: pick one per scenario
        std::int64_t churn_events = 0;   // target number of enter/leave events
        std::int64_t min_churn = 0;      // fail if fewer can be placed
        std::int64_t crashes = 0;        // target number of crashes
        std::optional<CrashAdversary> adversary; // nullopt: pick one per scenario
        Mutations mutations;
        Time think_max = kTicksPerUnit / 2;
        std::vector<std::string> mix;
        bool record_state = true;
        int attempts_per_event = 40;
    };

    /// Builds a scenario that passes validate_scenario by construction: each
    /// candidate churn event is kept only if the schedule stays valid.
    inline Scenario generate_scenario(const RandomSpec &spec)
    {
        Rng rng(spec.seed);
        Scenario s;
        s.params = spec.params;
        s.seed = rng.next();
        s.horizon = spec.horizon;
        s.object = spec.object;
        s.lattice = spec.lattice;
        s.mutations = spec.mutations;
        s.record_state = spec.record_state;
        const auto n = rng.uniform(spec.nodes_lo, spec.nodes_hi);
        for (NodeId i = 0; i < static_cast<NodeId>(n); ++i)
        {
            s.initial_nodes.insert(i);
        }
        if (spec.delay)
        {
            s.delay.model = *spec.delay;
        }
        else
        {
            s.delay.model = static_cast<DelayModel>(rng.uniform(0, 2));
        }
        if (s.delay.model == DelayModel::fixed)
        {
            s.delay.fixed = rng.uniform(1, s.params.d);
        }
        s.adversary = spec.adversary ? *spec.adversary : (rng.chance(1, 2) ? CrashAdversary::none_delivered : CrashAdversary::random_subset);

        RandomWorkload w;
        w.ops = rng.uniform(spec.ops_lo, spec.ops_hi);
        w.think_max = spec.think_max;
        w.mix = spec.mix;
        s.workload = w;

        // Churn placement. Late events would leave no time to observe their effects.
        const Time d = s.params.d;
        const Time lo = d / 2;
        const Time hi = std::max(lo + 1, s.horizon - 6 * d);
        NodeId next_id = static_cast<NodeId>(n);
        std::set<NodeId> active = s.initial_nodes;

        auto try_add = [&](ChurnDirective c) {
            s.churn.push_back(c);
            if (validate_scenario(s).ok())
            {
                return true;
            }
            s.churn.pop_back();
            return false;
        };

        // The active set depends on event order, so candidates are checked against
        // the final schedule state only when placed after every existing event.
        auto last_time = [&]() { return s.churn.empty() ? Time{0} : s.churn.back().t; };

        std::int64_t placed = 0;
        std::int64_t crashes = 0;
        const std::int64_t want = spec.churn_events + spec.crashes;
        int budget = static_cast<int>(want) * spec.attempts_per_event;
        while ((placed < spec.churn_events || crashes < spec.crashes) && budget-- > 0)
        {
            const Time start = std::max(lo, last_time() + 1);
            if (start >= hi)
            {
                break;
            }
            // Geometric-ish spacing keeps events spread over the run.
            const Time span = std::max<Time>(1, (hi - start) / std::max<std::int64_t>(1, want - placed - crashes));
            const Time t = start + rng.uniform(0, std::min<Time>(span * 2, hi - start));
            ChurnDirective c;
            c.t = t;
            const bool want_crash = crashes < spec.crashes && (placed >= spec.churn_events || rng.chance(1, 3));
            if (want_crash)
            {
                c.kind = ChurnKind::crash;
            }
            else
            {
                c.kind = rng.chance(1, 2) ? ChurnKind::enter : ChurnKind::leave;
            }
            if (c.kind == ChurnKind::enter)
            {
                c.node = next_id;
            }
            else
            {
                if (active.empty())
                {
                    continue;
                }
                auto it = active.begin();
                std::advance(it, rng.uniform(0, static_cast<std::int64_t>(active.size()) - 1));
                c.node = *it;
            }
            if (!try_add(c))
            {
                continue;
            }
            if (c.kind == ChurnKind::enter)
            {
                ++next_id;
                active.insert(c.node);
                ++placed;
            }
            else
            {
                active.erase(c.node);
                c.kind == ChurnKind::crash ? ++crashes : ++placed;
            }
        }
        if (placed < spec.min_churn)
        {
            throw std::runtime_error("generate_scenario: could only place " + std::to_string(placed) + " of " +
                                     std::to_string(spec.min_churn) + " required churn events");
        }
        return s;
    }
}
