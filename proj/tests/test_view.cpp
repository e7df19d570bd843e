#include <ccc/view.hpp>

#include <gtest/gtest.h>

using namespace ccc;

namespace
{
    ViewEntry e(NodeId n, const char *v, Sqno k) { return ViewEntry{n, k, Value(v)}; }

    /// Views over a small node and sqno space so that collisions are common.
    View random_view(Rng &rng)
    {
        std::vector<ViewEntry> es;
        for (NodeId n = 0; n < 6; ++n)
        {
            if (rng.chance(1, 2))
            {
                const auto k = static_cast<Sqno>(rng.uniform(1, 4));
                // value is a function of (node, sqno), as the protocol guarantees
                es.push_back(ViewEntry{n, k, Value(std::to_string(n) + ":" + std::to_string(k))});
            }
        }
        return View::of(std::move(es));
    }
}

TEST(Merge, EmptyViews) { EXPECT_TRUE(merge(View{}, View{}).empty()); }

TEST(Merge, LargerSqnoWins)
{
    const View m = merge(View::of({e(1, "a", 1)}), View::of({e(1, "b", 2)}));
    EXPECT_EQ(m, View::of({e(1, "b", 2)}));
}

TEST(Merge, PerNodeMaximum)
{
    const View m = merge(View::of({e(1, "a", 3), e(2, "c", 1)}), View::of({e(1, "b", 2), e(3, "d", 5)}));
    EXPECT_EQ(m, View::of({e(1, "a", 3), e(2, "c", 1), e(3, "d", 5)}));
}

TEST(Merge, AbsorbReportsChange)
{
    View v = View::of({e(1, "a", 2)});
    EXPECT_FALSE(v.absorb(View::of({e(1, "old", 1)})));
    EXPECT_TRUE(v.absorb(View::of({e(2, "x", 1)})));
    EXPECT_EQ(v.size(), 2u);
}

TEST(Merge, DuplicateNodeRejected) { EXPECT_THROW(View::of({e(1, "a", 1), e(1, "b", 2)}), std::invalid_argument); }

TEST(ViewOrder, EmptyIsBottom)
{
    Rng rng(3);
    for (int i = 0; i < 50; ++i)
    {
        EXPECT_TRUE(view_leq(View{}, random_view(rng)));
    }
}

TEST(ViewOrder, SqnoDominance)
{
    const View a = View::of({e(1, "x", 1)});
    const View b = View::of({e(1, "y", 2)});
    EXPECT_TRUE(view_leq(a, b));
    EXPECT_FALSE(view_leq(b, a));
}

TEST(ViewOrder, Incomparable)
{
    const View a = View::of({e(1, "a", 2), e(2, "b", 1)});
    const View b = View::of({e(1, "c", 1), e(2, "d", 2)});
    EXPECT_FALSE(view_leq(a, b));
    EXPECT_FALSE(view_leq(b, a));
}

TEST(MergeProperty, RandomTriples)
{
    Rng rng(20240601);
    for (int i = 0; i < 2000; ++i)
    {
        const View a = random_view(rng), b = random_view(rng), c = random_view(rng);
        ASSERT_EQ(merge(a, b), merge(b, a));
        ASSERT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
        ASSERT_EQ(merge(a, a), a);
        ASSERT_TRUE(view_leq(a, merge(a, b)));
        ASSERT_TRUE(view_leq(b, merge(a, b)));
    }
}
