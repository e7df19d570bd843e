#pragma once

#include "core.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccc
{
    /// Model parameters. alpha, delta, gamma, beta are exact rationals; d is the
    /// delay bound in ticks.
    struct ModelParams
    {
        Rational alpha = 0;
        Rational delta = Rational(21, 100);
        Rational gamma = Rational(79, 100);
        Rational beta = Rational(79, 100);
        std::int64_t n_min = 2;
        Time d = kTicksPerUnit;

        /// Empty when every range invariant holds.
        std::vector<std::string> range_errors() const
        {
            std::vector<std::string> e;
            if (alpha < 0)
            {
                e.emplace_back("alpha must be >= 0");
            }
            if (delta < 0 || delta > 1)
            {
                e.emplace_back("delta must be in [0, 1]");
            }
            if (gamma <= 0 || gamma > 1)
            {
                e.emplace_back("gamma must be in (0, 1]");
            }
            if (beta <= 0 || beta > 1)
            {
                e.emplace_back("beta must be in (0, 1]");
            }
            if (n_min < 1)
            {
                e.emplace_back("n_min must be >= 1");
            }
            if (d <= 0)
            {
                e.emplace_back("d must be > 0");
            }
            return e;
        }
    };

    namespace detail
    {
        inline Rational rpow(const Rational &base, int k)
        {
            Rational r = 1;
            for (int i = 0; i < k; ++i)
            {
                r *= base;
            }
            return r;
        }
    }

    /// Fraction of nodes guaranteed to survive a 3D interval: (1-α)³ − Δ(1+α)³.
    inline Rational compute_z(const Rational &alpha, const Rational &delta)
    {
        return detail::rpow(1 - alpha, 3) - delta * detail::rpow(1 + alpha, 3);
    }

    inline double compute_z(double alpha, double delta)
    {
        return to_double(compute_z(rational_from_double(alpha), rational_from_double(delta)));
    }

    struct ConstraintCheck
    {
        std::string id;
        std::string relation; // lhs <relation> rhs must hold
        std::optional<Rational> lhs;
        std::optional<Rational> rhs; // nullopt when the bound is undefined
        bool satisfied = false;
        std::string note;
    };

    struct ConstraintReport
    {
        Rational z;
        std::array<ConstraintCheck, 4> constraints;
        bool overall = false;
    };

    /// Evaluates the four parameter constraints with exact arithmetic:
    ///   C1  N_min ≥ 1 / (Z + γ − (1+α)³)
    ///   C2  γ ≤ Z / (1+α)³
    ///   C3  β ≤ Z / (1+α)²
    ///   C4  β > ((1−Z)(1+α)⁵ + (1+α)⁶) / (((1−α)³ − Δ(1+α)²)((1+α)² + 1))
    /// A non-positive denominator in C1 or C4 makes that constraint unsatisfiable.
    inline ConstraintReport check_constraints(const Rational &alpha, const Rational &delta, const Rational &gamma, const Rational &beta,
                                              std::int64_t n_min)
    {
        using detail::rpow;
        ConstraintReport rep;
        rep.z = compute_z(alpha, delta);
        const Rational a1 = 1 + alpha;

        {
            auto &c = rep.constraints[0];
            c.id = "C1";
            c.relation = ">=";
            c.lhs = Rational(n_min);
            const Rational denom = rep.z + gamma - rpow(a1, 3);
            if (denom <= 0)
            {
                c.satisfied = false;
                c.note = "denominator Z + gamma - (1+alpha)^3 is not positive";
            }
            else
            {
                c.rhs = 1 / denom;
                c.satisfied = *c.lhs >= *c.rhs;
            }
        }
        {
            auto &c = rep.constraints[1];
            c.id = "C2";
            c.relation = "<=";
            c.lhs = gamma;
            c.rhs = rep.z / rpow(a1, 3);
            c.satisfied = *c.lhs <= *c.rhs;
        }
        {
            auto &c = rep.constraints[2];
            c.id = "C3";
            c.relation = "<=";
            c.lhs = beta;
            c.rhs = rep.z / rpow(a1, 2);
            c.satisfied = *c.lhs <= *c.rhs;
        }
        {
            auto &c = rep.constraints[3];
            c.id = "C4";
            c.relation = ">";
            c.lhs = beta;
            const Rational denom = (rpow(1 - alpha, 3) - delta * rpow(a1, 2)) * (rpow(a1, 2) + 1);
            if (denom <= 0)
            {
                c.satisfied = false;
                c.note = "denominator ((1-alpha)^3 - delta(1+alpha)^2)((1+alpha)^2+1) is not positive";
            }
            else
            {
                c.rhs = ((1 - rep.z) * rpow(a1, 5) + rpow(a1, 6)) / denom;
                c.satisfied = *c.lhs > *c.rhs;
            }
        }
        rep.overall = true;
        for (const auto &c : rep.constraints)
        {
            rep.overall = rep.overall && c.satisfied;
        }
        return rep;
    }

    inline ConstraintReport check_constraints(const ModelParams &p)
    {
        return check_constraints(p.alpha, p.delta, p.gamma, p.beta, p.n_min);
    }

    inline nlohmann::json to_json(const ConstraintReport &r)
    {
        nlohmann::json j;
        j["z"] = to_double(r.z);
        j["z_exact"] = r.z.str();
        nlohmann::json cs = nlohmann::json::array();
        for (const auto &c : r.constraints)
        {
            nlohmann::json cj;
            cj["id"] = c.id;
            cj["relation"] = c.relation;
            cj["lhs"] = c.lhs ? nlohmann::json(to_double(*c.lhs)) : nlohmann::json(nullptr);
            cj["rhs"] = c.rhs ? nlohmann::json(to_double(*c.rhs)) : nlohmann::json(nullptr);
            cj["rhs_exact"] = c.rhs ? nlohmann::json(c.rhs->str()) : nlohmann::json(nullptr);
            cj["satisfied"] = c.satisfied;
            if (!c.note.empty())
            {
                cj["note"] = c.note;
            }
            cs.push_back(std::move(cj));
        }
        j["constraints"] = std::move(cs);
        j["overall"] = r.overall;
        return j;
    }

    // ---- feasible-region scan -------------------------------------------

    /// Inclusive arithmetic range lo, lo+step, ..., <= hi, in exact rationals.
    struct RationalRange
    {
        Rational lo = 0;
        Rational hi = 0;
        Rational step = 1;

        std::vector<Rational> values() const
        {
            if (step <= 0)
            {
                throw std::invalid_argument("range step must be positive");
            }
            std::vector<Rational> out;
            for (Rational v = lo; v <= hi; v += step)
            {
                out.push_back(v);
            }
            return out;
        }

        /// Parses "lo..hi:step" (or a single value).
        static RationalRange parse(const std::string &text)
        {
            RationalRange r;
            const auto dots = text.find("..");
            if (dots == std::string::npos)
            {
                r.lo = r.hi = parse_decimal(text);
                r.step = 1;
                return r;
            }
            const auto colon = text.find(':', dots);
            r.lo = parse_decimal(text.substr(0, dots));
            r.hi = parse_decimal(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
            r.step = colon == std::string::npos ? Rational(1) : parse_decimal(text.substr(colon + 1));
            return r;
        }
    };

    struct RegionCell
    {
        Rational alpha;
        Rational delta;
        bool feasible = false;
        std::optional<Rational> gamma;
        std::optional<Rational> beta;
    };

    struct RegionSpec
    {
        RationalRange alpha{0, Rational(5, 100), Rational(5, 1000)};
        RationalRange delta{0, Rational(25, 100), Rational(1, 100)};
        RationalRange gamma{Rational(1, 100), 1, Rational(1, 100)};
        RationalRange beta{Rational(1, 100), 1, Rational(1, 100)};
        std::int64_t n_min = 2;
    };

    /// For every (α, Δ) cell, grid-search (γ, β). γ only enters C1 and C2 and β
    /// only C3 and C4, so the two grids are searched independently: the largest
    /// γ satisfying C1 and C2 and the largest β satisfying C3 and C4. The chosen
    /// pair is re-verified with check_constraints.
    inline std::vector<RegionCell> scan_feasible_region(const RegionSpec &spec)
    {
        const auto gammas = spec.gamma.values();
        const auto betas = spec.beta.values();
        std::vector<RegionCell> cells;
        for (const auto &a : spec.alpha.values())
        {
            for (const auto &dl : spec.delta.values())
            {
                RegionCell cell{a, dl, false, std::nullopt, std::nullopt};
                std::optional<Rational> g_best;
                for (auto g = gammas.rbegin(); g != gammas.rend(); ++g)
                {
                    const auto rep = check_constraints(a, dl, *g, betas.back(), spec.n_min);
                    if (rep.constraints[0].satisfied && rep.constraints[1].satisfied)
                    {
                        g_best = *g;
                        break;
                    }
                }
                std::optional<Rational> b_best;
                for (auto b = betas.rbegin(); b != betas.rend(); ++b)
                {
                    const auto rep = check_constraints(a, dl, gammas.front(), *b, spec.n_min);
                    if (rep.constraints[2].satisfied && rep.constraints[3].satisfied)
                    {
                        b_best = *b;
                        break;
                    }
                    if (rep.constraints[3].rhs && *b <= *rep.constraints[3].rhs)
                    {
                        break; // every smaller beta fails C4 too
                    }
                }
                if (g_best && b_best && check_constraints(a, dl, *g_best, *b_best, spec.n_min).overall)
                {
                    cell.feasible = true;
                    cell.gamma = g_best;
                    cell.beta = b_best;
                }
                cells.push_back(std::move(cell));
            }
        }
        return cells;
    }

    inline std::string region_csv(const std::vector<RegionCell> &cells)
    {
        std::ostringstream os;
        os << "alpha,delta,gamma,beta,feasible\n";
        for (const auto &c : cells)
        {
            os << to_decimal_string(c.alpha) << ',' << to_decimal_string(c.delta) << ','
               << (c.gamma ? to_decimal_string(*c.gamma) : std::string()) << ',' << (c.beta ? to_decimal_string(*c.beta) : std::string())
               << ',' << (c.feasible ? "true" : "false") << '\n';
        }
        return os.str();
    }
}
