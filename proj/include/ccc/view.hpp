#pragma once

#include "core.hpp"

#include <algorithm>
#include <cassert>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccc
{
    using Sqno = std::uint64_t;

    /// Opaque stored value. Immutable and shared, so copying a view copies
    /// handles rather than payload bytes.
    class Value
    {
    public:
        Value() : m_bytes(empty()) {}
        explicit Value(std::string bytes) : m_bytes(std::make_shared<const std::string>(std::move(bytes))) {}

        const std::string &bytes() const { return *m_bytes; }

        friend bool operator==(const Value &a, const Value &b)
        {
            return a.m_bytes == b.m_bytes || *a.m_bytes == *b.m_bytes;
        }

    private:
        static const std::shared_ptr<const std::string> &empty()
        {
            static const auto e = std::make_shared<const std::string>();
            return e;
        }

        std::shared_ptr<const std::string> m_bytes;
    };

    struct ViewEntry
    {
        NodeId node = kNoNode;
        Sqno sqno = 0;
        Value value;
    };

    /// Store-collect view: at most one (node, value, sqno) triple per node,
    /// kept sorted by node id.
    class View
    {
    public:
        View() = default;

        static View of(std::vector<ViewEntry> entries)
        {
            std::sort(entries.begin(), entries.end(), [](const ViewEntry &a, const ViewEntry &b) { return a.node < b.node; });
            for (std::size_t i = 1; i < entries.size(); ++i)
            {
                if (entries[i].node == entries[i - 1].node)
                {
                    throw std::invalid_argument("view has duplicate node id " + std::to_string(entries[i].node));
                }
            }
            View v;
            v.m_entries = std::move(entries);
            return v;
        }

        const std::vector<ViewEntry> &entries() const { return m_entries; }
        std::size_t size() const { return m_entries.size(); }
        bool empty() const { return m_entries.empty(); }

        const ViewEntry *find(NodeId node) const
        {
            auto it = std::lower_bound(m_entries.begin(), m_entries.end(), node, [](const ViewEntry &e, NodeId n) { return e.node < n; });
            return it != m_entries.end() && it->node == node ? &*it : nullptr;
        }

        /// In-place merge; returns true if anything changed.
        bool absorb(const View &other);

        friend bool operator==(const View &a, const View &b)
        {
            if (a.m_entries.size() != b.m_entries.size())
            {
                return false;
            }
            for (std::size_t i = 0; i < a.m_entries.size(); ++i)
            {
                const auto &x = a.m_entries[i];
                const auto &y = b.m_entries[i];
                if (x.node != y.node || x.sqno != y.sqno || !(x.value == y.value))
                {
                    return false;
                }
            }
            return true;
        }

    private:
        std::vector<ViewEntry> m_entries;
    };

    /// Per node, keep the triple with the larger sequence number; triples whose
    /// node appears in only one input are kept as-is.
    inline View merge(const View &a, const View &b)
    {
        View out = a;
        out.absorb(b);
        return out;
    }

    inline bool View::absorb(const View &other)
    {
        if (other.m_entries.empty())
        {
            return false;
        }
        bool changed = false;
        std::vector<ViewEntry> out;
        out.reserve(m_entries.size() + other.m_entries.size());
        auto i = m_entries.begin();
        auto j = other.m_entries.begin();
        while (i != m_entries.end() || j != other.m_entries.end())
        {
            if (j == other.m_entries.end() || (i != m_entries.end() && i->node < j->node))
            {
                out.push_back(*i++);
            }
            else if (i == m_entries.end() || j->node < i->node)
            {
                out.push_back(*j++);
                changed = true;
            }
            else
            {
                if (i->sqno == j->sqno)
                {
                    // (node, sqno) identifies a store uniquely.
                    assert(i->value == j->value && "view corruption: same (node, sqno), different values");
                    out.push_back(*i);
                }
                else if (i->sqno > j->sqno)
                {
                    out.push_back(*i);
                }
                else
                {
                    out.push_back(*j);
                    changed = true;
                }
                ++i;
                ++j;
            }
        }
        if (changed)
        {
            m_entries = std::move(out);
        }
        return changed;
    }

    /// a ⪯ b: every node in a appears in b with a sequence number at least as large.
    inline bool view_leq(const View &a, const View &b)
    {
        for (const auto &e : a.entries())
        {
            const auto *other = b.find(e.node);
            if (other == nullptr || other->sqno < e.sqno)
            {
                return false;
            }
        }
        return true;
    }
}
