#include <ccc/params.hpp>

#include <gtest/gtest.h>

using namespace ccc;

namespace
{
    Rational dec(const char *s) { return parse_decimal(s); }

    bool all_pass(const char *a, const char *d, const char *g, const char *b, std::int64_t n = 2)
    {
        return check_constraints(dec(a), dec(d), dec(g), dec(b), n).overall;
    }
}

TEST(Params, ZNoChurnNoCrash) { EXPECT_EQ(compute_z(Rational(0), Rational(0)), Rational(1)); }

TEST(Params, ZCrashesOnly) { EXPECT_EQ(compute_z(Rational(0), dec("0.21")), dec("0.79")); }

TEST(Params, ZChurnAndCrashes)
{
    // 0.96^3 - 0.01 * 1.04^3, expanded by hand
    EXPECT_EQ(compute_z(dec("0.04"), dec("0.01")), dec("0.87348736"));
    EXPECT_NEAR(compute_z(0.04, 0.01), 0.87348736, 1e-12);
}

TEST(Params, FirstFeasiblePoint)
{
    const auto rep = check_constraints(dec("0"), dec("0.21"), dec("0.79"), dec("0.79"), 2);
    for (const auto &c : rep.constraints)
    {
        EXPECT_TRUE(c.satisfied) << c.id;
    }
    EXPECT_TRUE(rep.overall);
    // gamma sits exactly on the C2 bound Z / (1+alpha)^3 = 0.79
    EXPECT_EQ(*rep.constraints[1].rhs, dec("0.79"));
}

TEST(Params, SecondFeasiblePoint)
{
    const auto rep = check_constraints(dec("0.04"), dec("0.01"), dec("0.77"), dec("0.80"), 2);
    for (const auto &c : rep.constraints)
    {
        EXPECT_TRUE(c.satisfied) << c.id;
    }
}

TEST(Params, LargeDeltaFailsC2)
{
    const auto rep = check_constraints(dec("0"), dec("0.5"), dec("0.79"), dec("0.79"), 2);
    EXPECT_EQ(rep.z, dec("0.5"));
    EXPECT_FALSE(rep.constraints[1].satisfied);
    EXPECT_FALSE(rep.overall);
}

TEST(Params, C4StrictAtHalf)
{
    // With alpha = delta = 0 the C4 bound is exactly 1/2 and the inequality is strict.
    const auto at = check_constraints(dec("0"), dec("0"), dec("0.5"), dec("0.5"), 2);
    EXPECT_EQ(*at.constraints[3].rhs, Rational(1, 2));
    EXPECT_FALSE(at.constraints[3].satisfied);
    EXPECT_TRUE(all_pass("0", "0", "0.55", "0.55"));
}

TEST(Params, NonPositiveDenominatorIsUnsatisfiable)
{
    const auto rep = check_constraints(dec("0.5"), dec("0.9"), dec("0.5"), dec("0.5"), 2);
    EXPECT_FALSE(rep.constraints[0].satisfied);
    EXPECT_FALSE(rep.constraints[0].rhs.has_value());
    EXPECT_FALSE(rep.overall);
}

TEST(Params, NMinMatters)
{
    // C1 bound at the first feasible point is 1 / (0.79 + 0.79 - 1) = 1/0.58, so N_min = 1 is too small.
    const auto rep = check_constraints(dec("0"), dec("0.21"), dec("0.79"), dec("0.79"), 1);
    EXPECT_FALSE(rep.constraints[0].satisfied);
    EXPECT_EQ(*rep.constraints[0].rhs, Rational(100, 58));
}

TEST(Params, JsonReportShape)
{
    const auto j = to_json(check_constraints(ModelParams{}));
    ASSERT_EQ(j.at("constraints").size(), 4u);
    EXPECT_EQ(j.at("constraints")[0].at("id"), "C1");
    EXPECT_TRUE(j.at("overall").get<bool>());
}

TEST(Params, RangeErrors)
{
    ModelParams p;
    EXPECT_TRUE(p.range_errors().empty());
    p.beta = 0;
    p.delta = Rational(3, 2);
    EXPECT_EQ(p.range_errors().size(), 2u);
}

TEST(ParamsScan, KnownCells)
{
    RegionSpec spec;
    spec.alpha = RationalRange::parse("0..0.04:0.04");
    spec.delta = RationalRange::parse("0.01..0.21:0.2");
    spec.n_min = 2;
    const auto cells = scan_feasible_region(spec);
    auto find = [&](const char *a, const char *d) {
        for (const auto &c : cells)
        {
            if (c.alpha == dec(a) && c.delta == dec(d))
            {
                return c;
            }
        }
        ADD_FAILURE() << "missing cell " << a << "," << d;
        return RegionCell{};
    };
    EXPECT_TRUE(find("0", "0.21").feasible);
    EXPECT_TRUE(find("0.04", "0.01").feasible);
    EXPECT_FALSE(find("0.04", "0.21").feasible);
}

TEST(ParamsScan, FeasibleCellsCarryWitnesses)
{
    RegionSpec spec;
    spec.alpha = RationalRange::parse("0..0.04:0.01");
    spec.delta = RationalRange::parse("0..0.25:0.01");
    for (const auto &c : scan_feasible_region(spec))
    {
        if (!c.feasible)
        {
            continue;
        }
        ASSERT_TRUE(c.gamma && c.beta);
        EXPECT_TRUE(check_constraints(c.alpha, c.delta, *c.gamma, *c.beta, spec.n_min).overall);
    }
}

TEST(ParamsScan, MonotoneInDelta)
{
    RegionSpec spec;
    spec.alpha = RationalRange::parse("0..0.05:0.005");
    spec.delta = RationalRange::parse("0..0.25:0.01");
    const auto cells = scan_feasible_region(spec);
    std::map<Rational, std::vector<std::pair<Rational, bool>>> by_alpha;
    for (const auto &c : cells)
    {
        by_alpha[c.alpha].emplace_back(c.delta, c.feasible);
    }
    for (auto &[a, row] : by_alpha)
    {
        std::sort(row.begin(), row.end());
        for (std::size_t i = 1; i < row.size(); ++i)
        {
            EXPECT_FALSE(!row[i - 1].second && row[i].second) << "alpha " << a << " delta " << row[i].first;
        }
    }
}

TEST(ParamsScan, CsvHeader)
{
    RegionSpec spec;
    spec.alpha = RationalRange::parse("0..0:1");
    spec.delta = RationalRange::parse("0.21..0.21:1");
    const auto csv = region_csv(scan_feasible_region(spec));
    EXPECT_EQ(csv.substr(0, csv.find('\n')).find("alpha"), 0u);
    EXPECT_NE(csv.find("true"), std::string::npos);
}
