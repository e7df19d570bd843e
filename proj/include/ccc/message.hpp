#pragma once

#include "membership.hpp"
#include "view.hpp"

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <variant>

namespace ccc
{
    using json = nlohmann::json;

    // Churn management (common code).
    struct EnterMsg
    {
        NodeId p;
    };
    struct EnterEchoMsg
    {
        ChangesSet changes;
        View lview;
        bool is_joined;
        NodeId q; // node whose enter is being answered
    };
    struct JoinMsg
    {
        NodeId p;
    };
    struct JoinEchoMsg
    {
        NodeId q;
    };
    struct LeaveMsg
    {
        NodeId p;
    };
    struct LeaveEchoMsg
    {
        NodeId q;
    };

    // Client and server.
    struct CollectQueryMsg
    {
        std::uint64_t tag;
        NodeId p;
    };
    struct CollectReplyMsg
    {
        View lview;
        std::uint64_t tag;
        NodeId q; // intended recipient
    };
    struct StoreMsg
    {
        View lview;
        std::uint64_t tag;
        NodeId p;
    };
    struct StoreAckMsg
    {
        std::uint64_t tag;
        NodeId q; // intended recipient
    };
    struct StoreEchoMsg
    {
        View lview;
    };

    using Message = std::variant<EnterMsg, EnterEchoMsg, JoinMsg, JoinEchoMsg, LeaveMsg, LeaveEchoMsg, CollectQueryMsg,
                                 CollectReplyMsg, StoreMsg, StoreAckMsg, StoreEchoMsg>;

    using MessagePtr = std::shared_ptr<const Message>;

    inline const char *message_type(const Message &m)
    {
        struct Namer
        {
            const char *operator()(const EnterMsg &) const { return "enter"; }
            const char *operator()(const EnterEchoMsg &) const { return "enter-echo"; }
            const char *operator()(const JoinMsg &) const { return "join"; }
            const char *operator()(const JoinEchoMsg &) const { return "join-echo"; }
            const char *operator()(const LeaveMsg &) const { return "leave"; }
            const char *operator()(const LeaveEchoMsg &) const { return "leave-echo"; }
            const char *operator()(const CollectQueryMsg &) const { return "collect-query"; }
            const char *operator()(const CollectReplyMsg &) const { return "collect-reply"; }
            const char *operator()(const StoreMsg &) const { return "store"; }
            const char *operator()(const StoreAckMsg &) const { return "store-ack"; }
            const char *operator()(const StoreEchoMsg &) const { return "store-echo"; }
        };
        return std::visit(Namer{}, m);
    }

    // ---- JSON encodings -------------------------------------------------

    inline json view_to_json(const View &v)
    {
        json arr = json::array();
        for (const auto &e : v.entries())
        {
            arr.push_back(json::array({e.node, e.value.bytes(), e.sqno}));
        }
        return arr;
    }

    inline View view_from_json(const json &j)
    {
        std::vector<ViewEntry> entries;
        entries.reserve(j.size());
        for (const auto &t : j)
        {
            entries.push_back(ViewEntry{t.at(0).get<NodeId>(), t.at(2).get<Sqno>(), Value(t.at(1).get<std::string>())});
        }
        return View::of(std::move(entries));
    }

    inline json changes_to_json(const ChangesSet &c)
    {
        json arr = json::array();
        for (const auto &e : c.events())
        {
            arr.push_back(json::array({to_string(e.kind), e.node}));
        }
        return arr;
    }

    inline ChangeKind change_kind_from(const std::string &s)
    {
        if (s == "enter")
        {
            return ChangeKind::enter;
        }
        if (s == "join")
        {
            return ChangeKind::join;
        }
        if (s == "leave")
        {
            return ChangeKind::leave;
        }
        throw std::invalid_argument("unknown membership event kind: " + s);
    }

    inline ChangesSet changes_from_json(const json &j)
    {
        ChangesSet c;
        for (const auto &e : j)
        {
            c.add(change_kind_from(e.at(0).get<std::string>()), e.at(1).get<NodeId>());
        }
        return c;
    }

    inline json message_to_json(const Message &m)
    {
        json j;
        j["type"] = message_type(m);
        std::visit(
            [&j](const auto &msg) {
                using T = std::decay_t<decltype(msg)>;
                if constexpr (std::is_same_v<T, EnterMsg> || std::is_same_v<T, JoinMsg> || std::is_same_v<T, LeaveMsg>)
                {
                    j["p"] = msg.p;
                }
                else if constexpr (std::is_same_v<T, JoinEchoMsg> || std::is_same_v<T, LeaveEchoMsg>)
                {
                    j["q"] = msg.q;
                }
                else if constexpr (std::is_same_v<T, EnterEchoMsg>)
                {
                    j["Changes"] = changes_to_json(msg.changes);
                    j["LView"] = view_to_json(msg.lview);
                    j["is_joined"] = msg.is_joined;
                    j["q"] = msg.q;
                }
                else if constexpr (std::is_same_v<T, CollectQueryMsg>)
                {
                    j["tag"] = msg.tag;
                    j["p"] = msg.p;
                }
                else if constexpr (std::is_same_v<T, CollectReplyMsg>)
                {
                    j["LView"] = view_to_json(msg.lview);
                    j["tag"] = msg.tag;
                    j["q"] = msg.q;
                }
                else if constexpr (std::is_same_v<T, StoreMsg>)
                {
                    j["LView"] = view_to_json(msg.lview);
                    j["tag"] = msg.tag;
                    j["p"] = msg.p;
                }
                else if constexpr (std::is_same_v<T, StoreAckMsg>)
                {
                    j["tag"] = msg.tag;
                    j["q"] = msg.q;
                }
                else if constexpr (std::is_same_v<T, StoreEchoMsg>)
                {
                    j["LView"] = view_to_json(msg.lview);
                }
            },
            m);
        return j;
    }

    inline Message message_from_json(const json &j)
    {
        const auto type = j.at("type").get<std::string>();
        if (type == "enter")
        {
            return EnterMsg{j.at("p").get<NodeId>()};
        }
        if (type == "enter-echo")
        {
            return EnterEchoMsg{changes_from_json(j.at("Changes")), view_from_json(j.at("LView")), j.at("is_joined").get<bool>(),
                                j.at("q").get<NodeId>()};
        }
        if (type == "join")
        {
            return JoinMsg{j.at("p").get<NodeId>()};
        }
        if (type == "join-echo")
        {
            return JoinEchoMsg{j.at("q").get<NodeId>()};
        }
        if (type == "leave")
        {
            return LeaveMsg{j.at("p").get<NodeId>()};
        }
        if (type == "leave-echo")
        {
            return LeaveEchoMsg{j.at("q").get<NodeId>()};
        }
        if (type == "collect-query")
        {
            return CollectQueryMsg{j.at("tag").get<std::uint64_t>(), j.at("p").get<NodeId>()};
        }
        if (type == "collect-reply")
        {
            return CollectReplyMsg{view_from_json(j.at("LView")), j.at("tag").get<std::uint64_t>(), j.at("q").get<NodeId>()};
        }
        if (type == "store")
        {
            return StoreMsg{view_from_json(j.at("LView")), j.at("tag").get<std::uint64_t>(), j.at("p").get<NodeId>()};
        }
        if (type == "store-ack")
        {
            return StoreAckMsg{j.at("tag").get<std::uint64_t>(), j.at("q").get<NodeId>()};
        }
        if (type == "store-echo")
        {
            return StoreEchoMsg{view_from_json(j.at("LView"))};
        }
        throw std::invalid_argument("unknown message type: " + type);
    }
}
