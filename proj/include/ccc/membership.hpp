#pragma once

#include "core.hpp"

#include <compare>
#include <set>
#include <vector>

namespace ccc
{
    enum class ChangeKind : std::uint8_t
    {
        enter,
        join,
        leave,
    };

    inline const char *to_string(ChangeKind k)
    {
        switch (k)
        {
        case ChangeKind::enter:
            return "enter";
        case ChangeKind::join:
            return "join";
        case ChangeKind::leave:
            return "leave";
        }
        return "?";
    }

    struct MembershipEvent
    {
        ChangeKind kind = ChangeKind::enter;
        NodeId node = kNoNode;

        friend auto operator<=>(const MembershipEvent &, const MembershipEvent &) = default;
    };

    /// Set of enter/join/leave events known to a node. Present and Members
    /// sizes are maintained incrementally.
    class ChangesSet
    {
    public:
        bool contains(const MembershipEvent &e) const { return set_for(e.kind).count(e.node) != 0; }

        /// Returns true if the event was new.
        bool add(const MembershipEvent &e)
        {
            auto &s = set_for(e.kind);
            if (!s.insert(e.node).second)
            {
                return false;
            }
            switch (e.kind)
            {
            case ChangeKind::enter:
                if (!m_left.count(e.node))
                {
                    ++m_present;
                }
                break;
            case ChangeKind::join:
                if (!m_left.count(e.node))
                {
                    ++m_members;
                }
                break;
            case ChangeKind::leave:
                if (m_entered.count(e.node))
                {
                    --m_present;
                }
                if (m_joined.count(e.node))
                {
                    --m_members;
                }
                break;
            }
            return true;
        }

        bool add(ChangeKind k, NodeId n) { return add(MembershipEvent{k, n}); }

        /// Union; returns true if anything was added.
        bool absorb(const ChangesSet &other)
        {
            bool changed = false;
            for (NodeId n : other.m_entered)
            {
                changed |= add(ChangeKind::enter, n);
            }
            for (NodeId n : other.m_joined)
            {
                changed |= add(ChangeKind::join, n);
            }
            for (NodeId n : other.m_left)
            {
                changed |= add(ChangeKind::leave, n);
            }
            return changed;
        }

        std::size_t present_count() const { return m_present; }
        std::size_t members_count() const { return m_members; }

        std::set<NodeId> present() const
        {
            std::set<NodeId> out;
            for (NodeId n : m_entered)
            {
                if (!m_left.count(n))
                {
                    out.insert(n);
                }
            }
            return out;
        }

        std::set<NodeId> members() const
        {
            std::set<NodeId> out;
            for (NodeId n : m_joined)
            {
                if (!m_left.count(n))
                {
                    out.insert(n);
                }
            }
            return out;
        }

        const std::set<NodeId> &entered() const { return m_entered; }
        const std::set<NodeId> &joined() const { return m_joined; }
        const std::set<NodeId> &left() const { return m_left; }

        std::size_t size() const { return m_entered.size() + m_joined.size() + m_left.size(); }

        std::vector<MembershipEvent> events() const
        {
            std::vector<MembershipEvent> out;
            out.reserve(size());
            for (NodeId n : m_entered)
            {
                out.push_back({ChangeKind::enter, n});
            }
            for (NodeId n : m_joined)
            {
                out.push_back({ChangeKind::join, n});
            }
            for (NodeId n : m_left)
            {
                out.push_back({ChangeKind::leave, n});
            }
            return out;
        }

        friend bool operator==(const ChangesSet &a, const ChangesSet &b)
        {
            return a.m_entered == b.m_entered && a.m_joined == b.m_joined && a.m_left == b.m_left;
        }

    private:
        std::set<NodeId> &set_for(ChangeKind k)
        {
            return k == ChangeKind::enter ? m_entered : k == ChangeKind::join ? m_joined : m_left;
        }
        const std::set<NodeId> &set_for(ChangeKind k) const
        {
            return k == ChangeKind::enter ? m_entered : k == ChangeKind::join ? m_joined : m_left;
        }

        std::set<NodeId> m_entered;
        std::set<NodeId> m_joined;
        std::set<NodeId> m_left;
        std::size_t m_present = 0;
        std::size_t m_members = 0;
    };

    struct MembershipState
    {
        ChangesSet changes;
        bool is_joined = false;
        Ratio join_threshold{0, 1};
        std::int64_t join_counter = 0;

        static MembershipState initial_member(const std::set<NodeId> &initial_nodes)
        {
            MembershipState s;
            for (NodeId q : initial_nodes)
            {
                s.changes.add(ChangeKind::enter, q);
                s.changes.add(ChangeKind::join, q);
            }
            s.is_joined = true;
            return s;
        }
    };
}
