#pragma once

#include <json.hpp>

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace ccc
{
    /// A join-semilattice with a JSON encoding. join must be associative,
    /// commutative and idempotent; leq(a, join(a, b)) must hold.
    template <typename L>
    concept JoinSemilattice = requires(const typename L::value_type &a, const typename L::value_type &b, const nlohmann::json &j) {
        { L::bottom() } -> std::convertible_to<typename L::value_type>;
        { L::join(a, b) } -> std::convertible_to<typename L::value_type>;
        { L::leq(a, b) } -> std::convertible_to<bool>;
        { L::to_json(a) } -> std::convertible_to<nlohmann::json>;
        { L::from_json(j) } -> std::convertible_to<typename L::value_type>;
        { L::name() } -> std::convertible_to<std::string>;
    };

    /// Finite sets of integers under union.
    struct SetLattice
    {
        using value_type = std::set<std::int64_t>;

        static value_type bottom() { return {}; }

        static value_type join(const value_type &a, const value_type &b)
        {
            value_type out = a;
            out.insert(b.begin(), b.end());
            return out;
        }

        static bool leq(const value_type &a, const value_type &b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

        static nlohmann::json to_json(const value_type &a) { return nlohmann::json(a); }

        static value_type from_json(const nlohmann::json &j)
        {
            if (j.is_number_integer())
            {
                return value_type{j.get<std::int64_t>()};
            }
            return j.get<value_type>();
        }

        static std::string name() { return "set"; }
    };

    /// Integers under max. Bottom is the smallest representable value.
    struct MaxLattice
    {
        using value_type = std::int64_t;

        static value_type bottom() { return std::numeric_limits<std::int64_t>::min(); }
        static value_type join(value_type a, value_type b) { return std::max(a, b); }
        static bool leq(value_type a, value_type b) { return a <= b; }
        static nlohmann::json to_json(value_type a) { return nlohmann::json(a); }
        static value_type from_json(const nlohmann::json &j) { return j.get<std::int64_t>(); }
        static std::string name() { return "max"; }
    };

    static_assert(JoinSemilattice<SetLattice>);
    static_assert(JoinSemilattice<MaxLattice>);

    /// Runtime selection between the shipped lattices.
    enum class LatticeKind
    {
        set,
        max,
    };

    template <typename F>
    decltype(auto) with_lattice(LatticeKind kind, F &&f)
    {
        if (kind == LatticeKind::set)
        {
            return f(SetLattice{});
        }
        return f(MaxLattice{});
    }

    inline LatticeKind lattice_kind_from(const std::string &s)
    {
        if (s == "set")
        {
            return LatticeKind::set;
        }
        if (s == "max")
        {
            return LatticeKind::max;
        }
        throw std::invalid_argument("unknown lattice kind: " + s);
    }

    inline const char *to_string(LatticeKind k) { return k == LatticeKind::set ? "set" : "max"; }
}
