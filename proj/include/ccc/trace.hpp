#pragma once

#include "message.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ccc
{
    enum class RecordKind
    {
        meta,
        enter,
        joined,
        leave,
        crash,
        send,
        receive,
        invoke,
        response,
        note,
        state,
        skip,
    };

    inline const char *to_string(RecordKind k)
    {
        switch (k)
        {
        case RecordKind::meta:
            return "meta";
        case RecordKind::enter:
            return "enter";
        case RecordKind::joined:
            return "joined";
        case RecordKind::leave:
            return "leave";
        case RecordKind::crash:
            return "crash";
        case RecordKind::send:
            return "send";
        case RecordKind::receive:
            return "receive";
        case RecordKind::invoke:
            return "invoke";
        case RecordKind::response:
            return "response";
        case RecordKind::note:
            return "note";
        case RecordKind::state:
            return "state";
        case RecordKind::skip:
            return "skip";
        }
        return "?";
    }

    inline RecordKind record_kind_from(const std::string &s)
    {
        for (int k = 0; k <= static_cast<int>(RecordKind::skip); ++k)
        {
            if (s == to_string(static_cast<RecordKind>(k)))
            {
                return static_cast<RecordKind>(k);
            }
        }
        throw std::invalid_argument("unknown record kind: " + s);
    }

    struct SendInfo
    {
        std::uint64_t id = 0;
        MessagePtr message;
    };

    struct ReceiveInfo
    {
        std::uint64_t id = 0;
        NodeId from = kNoNode;
    };

    /// Additions to a node's Changes and raised LView sequence numbers since
    /// that node's previous state record. Both only grow, so deltas replay exactly.
    struct StateDelta
    {
        std::vector<MembershipEvent> changes_added;
        std::vector<std::pair<NodeId, Sqno>> lview_raised;
    };

    using Payload = std::variant<json, SendInfo, ReceiveInfo, StateDelta>;

    struct Record
    {
        Time t = 0;
        NodeId node = kNoNode;
        RecordKind kind = RecordKind::meta;
        Payload payload = json::object();

        const json &data() const
        {
            static const json empty = json::object();
            const auto *j = std::get_if<json>(&payload);
            return j ? *j : empty;
        }
        const SendInfo &send() const { return std::get<SendInfo>(payload); }
        const ReceiveInfo &receive() const { return std::get<ReceiveInfo>(payload); }
        const StateDelta &state() const { return std::get<StateDelta>(payload); }
    };

    struct Trace
    {
        std::vector<Record> records;

        /// The meta record is always first.
        const json &meta() const
        {
            if (records.empty() || records.front().kind != RecordKind::meta)
            {
                throw std::invalid_argument("trace has no meta record");
            }
            return records.front().data();
        }

        Time d() const { return meta().at("d_ticks").get<Time>(); }
        Time horizon() const { return meta().at("horizon_ticks").get<Time>(); }
    };

    // ---- JSON-lines codec ----------------------------------------------

    inline json payload_to_json(const Record &r)
    {
        return std::visit(
            [](const auto &p) -> json {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, json>)
                {
                    return p;
                }
                else if constexpr (std::is_same_v<T, SendInfo>)
                {
                    return json{{"id", p.id}, {"message", message_to_json(*p.message)}};
                }
                else if constexpr (std::is_same_v<T, ReceiveInfo>)
                {
                    return json{{"id", p.id}, {"from", p.from}};
                }
                else
                {
                    json changes = json::array();
                    for (const auto &e : p.changes_added)
                    {
                        changes.push_back(json::array({to_string(e.kind), e.node}));
                    }
                    json lview = json::array();
                    for (const auto &[n, s] : p.lview_raised)
                    {
                        lview.push_back(json::array({n, s}));
                    }
                    return json{{"changes", std::move(changes)}, {"lview", std::move(lview)}};
                }
            },
            r.payload);
    }

    /// One line, keys in the fixed order t, node, kind, payload.
    inline std::string record_to_line(const Record &r)
    {
        std::string line = "{\"t\":";
        line += std::to_string(r.t);
        line += ",\"node\":";
        line += r.node == kNoNode ? std::string("null") : std::to_string(r.node);
        line += ",\"kind\":\"";
        line += to_string(r.kind);
        line += "\",\"payload\":";
        line += payload_to_json(r).dump();
        line += '}';
        return line;
    }

    inline Record record_from_json(const json &j)
    {
        Record r;
        r.t = j.at("t").get<Time>();
        r.node = j.at("node").is_null() ? kNoNode : j.at("node").get<NodeId>();
        r.kind = record_kind_from(j.at("kind").get<std::string>());
        const json &p = j.at("payload");
        switch (r.kind)
        {
        case RecordKind::send:
            r.payload = SendInfo{p.at("id").get<std::uint64_t>(), std::make_shared<const Message>(message_from_json(p.at("message")))};
            break;
        case RecordKind::receive:
            r.payload = ReceiveInfo{p.at("id").get<std::uint64_t>(), p.at("from").get<NodeId>()};
            break;
        case RecordKind::state:
        {
            StateDelta d;
            for (const auto &e : p.at("changes"))
            {
                d.changes_added.push_back({change_kind_from(e.at(0).get<std::string>()), e.at(1).get<NodeId>()});
            }
            for (const auto &e : p.at("lview"))
            {
                d.lview_raised.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<Sqno>());
            }
            r.payload = std::move(d);
            break;
        }
        default:
            r.payload = p;
            break;
        }
        return r;
    }

    inline void write_trace(std::ostream &os, const Trace &t)
    {
        for (const auto &r : t.records)
        {
            os << record_to_line(r) << '\n';
        }
    }

    inline std::string trace_to_string(const Trace &t)
    {
        std::ostringstream os;
        write_trace(os, t);
        return os.str();
    }

    inline Trace read_trace(std::istream &is)
    {
        Trace t;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line))
        {
            ++lineno;
            if (line.empty())
            {
                continue;
            }
            try
            {
                t.records.push_back(record_from_json(json::parse(line)));
            }
            catch (const std::exception &e)
            {
                throw std::invalid_argument("trace line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return t;
    }

    inline Trace trace_from_string(const std::string &s)
    {
        std::istringstream is(s);
        return read_trace(is);
    }
}
