#pragma once

#include "../trace.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccc::check
{
    struct Violation
    {
        std::vector<std::size_t> witness_lines; // 1-based trace line numbers
        std::string explanation;
    };

    struct Verdict
    {
        std::string property;
        std::vector<Violation> violations;
        bool inconclusive = false;
        std::string note;

        bool pass() const { return violations.empty() && !inconclusive; }

        void add(std::vector<std::size_t> lines, std::string why) { violations.push_back({std::move(lines), std::move(why)}); }

        /// Keys in the order property, pass, violations.
        nlohmann::ordered_json to_json() const
        {
            nlohmann::ordered_json v = nlohmann::ordered_json::array();
            for (const auto &x : violations)
            {
                nlohmann::ordered_json e;
                e["witness_line_numbers"] = x.witness_lines;
                e["explanation"] = x.explanation;
                v.push_back(std::move(e));
            }
            nlohmann::ordered_json j;
            j["property"] = property;
            j["pass"] = pass();
            j["violations"] = std::move(v);
            if (inconclusive)
            {
                j["inconclusive"] = true;
            }
            if (!note.empty())
            {
                j["note"] = note;
            }
            return j;
        }
    };

    /// Raised for schedules that are not well-formed; distinct from a violation.
    struct MalformedSchedule : std::invalid_argument
    {
        using std::invalid_argument::invalid_argument;
    };

    inline std::size_t line_of(std::size_t record_index) { return record_index + 1; }

    struct Operation
    {
        NodeId node = kNoNode;
        std::string op;
        json args;
        json result;
        std::uint64_t opid = 0;
        std::size_t inv = 0;              // record index of the invocation
        std::optional<std::size_t> resp; // record index of the response
        Time inv_t = 0;
        Time resp_t = 0;

        bool pending() const { return !resp.has_value(); }
        /// Real-time order: this operation responds before `o` is invoked.
        bool precedes(const Operation &o) const { return resp && *resp < o.inv; }
    };

    /// Invocation/response sub-schedule, in invocation order.
    struct Schedule
    {
        std::vector<Operation> ops;
    };

    /// Extracts the invoke/response records. Throws MalformedSchedule when a
    /// node's records do not alternate starting with an invocation.
    inline Schedule extract_schedule(const Trace &t)
    {
        Schedule s;
        std::map<NodeId, std::size_t> open;
        for (std::size_t i = 0; i < t.records.size(); ++i)
        {
            const auto &r = t.records[i];
            if (r.kind == RecordKind::invoke)
            {
                if (open.count(r.node))
                {
                    throw MalformedSchedule("line " + std::to_string(line_of(i)) + ": invocation while another is pending at node " +
                                            std::to_string(r.node));
                }
                Operation op;
                op.node = r.node;
                op.op = r.data().at("op").get<std::string>();
                op.args = r.data().value("args", json::object());
                op.opid = r.data().value("opid", std::uint64_t{0});
                op.inv = i;
                op.inv_t = r.t;
                open[r.node] = s.ops.size();
                s.ops.push_back(std::move(op));
            }
            else if (r.kind == RecordKind::response)
            {
                auto it = open.find(r.node);
                if (it == open.end())
                {
                    throw MalformedSchedule("line " + std::to_string(line_of(i)) + ": response without invocation at node " +
                                            std::to_string(r.node));
                }
                auto &op = s.ops[it->second];
                if (r.data().value("op", op.op) != op.op)
                {
                    throw MalformedSchedule("line " + std::to_string(line_of(i)) + ": response does not match pending " + op.op);
                }
                op.result = r.data().value("result", json());
                op.resp = i;
                op.resp_t = r.t;
                open.erase(it);
            }
        }
        return s;
    }

    /// Per-node lifetime facts derived from the trace.
    struct Lifetimes
    {
        struct Life
        {
            Time enter = 0;
            bool initial = false;
            std::optional<Time> joined; // initial nodes count as joined at 0
            std::optional<Time> crash;
            std::optional<Time> leave;
            std::size_t enter_line = 0;

            std::optional<Time> end() const
            {
                if (crash)
                {
                    return crash;
                }
                return leave;
            }
            /// Active (entered, not crashed or left) at every point of [a, b].
            bool active_throughout(Time a, Time b) const
            {
                if (a < enter)
                {
                    return false;
                }
                const auto e = end();
                return !e || *e > b;
            }
        };

        std::map<NodeId, Life> nodes;
        std::vector<std::pair<Time, int>> presence; // +1 enter, -1 leave, in trace order

        /// N(t): nodes entered and not left by t (crashed nodes count).
        std::int64_t present_at(Time t) const
        {
            std::int64_t n = 0;
            for (const auto &[time, delta] : presence)
            {
                if (time > t)
                {
                    break;
                }
                n += delta;
            }
            return n;
        }
    };

    inline Lifetimes lifetimes(const Trace &t)
    {
        Lifetimes l;
        for (std::size_t i = 0; i < t.records.size(); ++i)
        {
            const auto &r = t.records[i];
            switch (r.kind)
            {
            case RecordKind::enter:
            {
                auto &life = l.nodes[r.node];
                life.enter = r.t;
                life.enter_line = line_of(i);
                life.initial = r.data().value("initial", false);
                if (life.initial)
                {
                    life.joined = 0;
                }
                l.presence.emplace_back(r.t, 1);
                break;
            }
            case RecordKind::joined:
                l.nodes[r.node].joined = r.t;
                break;
            case RecordKind::crash:
                l.nodes[r.node].crash = r.t;
                break;
            case RecordKind::leave:
                l.nodes[r.node].leave = r.t;
                l.presence.emplace_back(r.t, -1);
                break;
            default:
                break;
            }
        }
        return l;
    }

    /// Message ids whose broadcast was the last step before a crash.
    inline std::set<std::uint64_t> truncated_messages(const Trace &t)
    {
        std::set<std::uint64_t> out;
        for (const auto &r : t.records)
        {
            if (r.kind == RecordKind::crash && r.data().contains("truncated"))
            {
                for (const auto &id : r.data().at("truncated"))
                {
                    out.insert(id.get<std::uint64_t>());
                }
            }
        }
        return out;
    }
}
