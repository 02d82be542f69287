// Copyright 2026 The lcmatter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "lcm/lattice.hpp"

using namespace lcm;

TEST(Lattice, CausalPastExamples) {
    EXPECT_TRUE(causal_past({5, 3}, {2, 1}));
    EXPECT_FALSE(causal_past({5, 3}, {5, 3}));
    EXPECT_FALSE(causal_past({4, 0}, {1, 4}));
    // On the cone surface is not past under the strict convention.
    EXPECT_FALSE(causal_past({5, 3}, {2, 0}));
}

TEST(Lattice, PlcExamples) {
    EXPECT_EQ(plc({0, 4}, 10), flat_cut(0, 10));
    EXPECT_EQ(plc({3, 5}, 10).heights(), (std::vector<int>{0, 0, 0, 1, 2, 3, 2, 1, 0, 0}));
    for (int j = 0; j < 12; ++j) EXPECT_EQ(flat_cut(0, 12), plc({0, j}, 12));
}

TEST(Lattice, PlcAgreesWithCausalPastExhaustively) {
    const int L = 12, T = 12;
    long checked = 0;
    for (int xt = 0; xt < T; ++xt)
        for (int xj = 0; xj < L; ++xj) {
            Cut c = plc({xt, xj}, L);
            for (int t = 0; t < T; ++t)
                for (int j = 0; j < L; ++j) {
                    ASSERT_EQ(event_below(c, {t, j}), causal_past({xt, xj}, {t, j}))
                        << "x=" << to_string({xt, xj}) << " e=" << to_string({t, j});
                    ++checked;
                }
        }
    EXPECT_EQ(checked, 144L * 144L);
}

TEST(Lattice, PlcIsAlwaysACutAndMonotone) {
    const int L = 16, T = 16;
    for (int xt = 0; xt <= T; ++xt)
        for (int xj = 0; xj < L; ++xj) {
            Cut c = plc({xt, xj}, L);
            for (int j = 1; j < L; ++j) EXPECT_LE(std::abs(c[j] - c[j - 1]), 1);
            for (int yt = xt + 1; yt <= T; ++yt)
                for (int yj = 0; yj < L; ++yj) {
                    if (std::abs(yj - xj) > yt - xt) continue;
                    EXPECT_TRUE(cut_leq(c, plc({yt, yj}, L)));
                }
        }
}

TEST(Lattice, BoostedCuts) {
    Lattice lat{17, 20};
    EXPECT_EQ(boosted_cut(Rational::parse("0"), {4, 2}, lat), flat_cut(4, 17));
    Cut b = boosted_cut(Rational::parse("1/2"), {8, 8}, lat);
    EXPECT_EQ(b[0], 4);
    EXPECT_EQ(b[16], 12);
    EXPECT_EQ(b[8], 8);
    for (int j = 1; j < 17; ++j) EXPECT_LE(std::abs(b[j] - b[j - 1]), 1);
    // The rounding rule before repair, recomputed independently.
    for (int j = 0; j < 17; ++j) EXPECT_EQ(b[j], 8 + static_cast<int>(std::floor(0.5 * (j - 8) + 0.5)));
    EXPECT_THROW(boosted_cut(Rational::parse("1"), {4, 2}, lat), ValidationError);
    EXPECT_THROW(boosted_cut(Rational::parse("-3/2"), {4, 2}, lat), ValidationError);
}

TEST(Lattice, BoostedCutsSatisfyInvariantForManySlopes) {
    Lattice lat{24, 30};
    for (int num = -9; num <= 9; ++num) {
        Rational v{num, 10};
        for (int t0 : {0, 5, 15, 30})
            for (int j0 : {0, 11, 23}) {
                Cut c = boosted_cut(v, {t0, j0}, lat);
                for (int j = 1; j < 24; ++j) ASSERT_LE(std::abs(c[j] - c[j - 1]), 1);
                EXPECT_GE(c.min_height(), 0);
                EXPECT_LE(c.max_height(), 30);
            }
    }
}

TEST(Lattice, RationalParsing) {
    auto r = Rational::parse("2/4");
    EXPECT_EQ(r.num, 1);
    EXPECT_EQ(r.den, 2);
    r = Rational::parse("-0.25");
    EXPECT_EQ(r.num, -1);
    EXPECT_EQ(r.den, 4);
    EXPECT_THROW(Rational::parse("a/b"), ValidationError);
    EXPECT_THROW(Rational::parse("1/0"), ValidationError);
}

TEST(Lattice, CutOrderingAndBelow) {
    Cut s0 = flat_cut(0, 8);
    Cut s = plc({4, 3}, 8);
    EXPECT_TRUE(cut_leq(s0, s));
    EXPECT_FALSE(cut_leq(s, s0));
    EXPECT_FALSE(event_below(s, {4, 3}));
    EXPECT_FALSE(event_below(s, {2, 1}));
    EXPECT_TRUE(event_below(s, {2, 2}));
    EXPECT_THROW(cut_leq(flat_cut(0, 8), flat_cut(0, 9)), ValidationError);
    EXPECT_EQ(cut_max(s0, s), s);
    EXPECT_EQ(cut_min(s0, s), s0);
}

TEST(Lattice, CutRejectsNonCausalStaircases) {
    EXPECT_THROW(Cut(std::vector<int>{0, 2}), ValidationError);
    EXPECT_THROW(Cut(std::vector<int>{-1, 0}), ValidationError);
    EXPECT_NO_THROW(Cut(std::vector<int>{0, 1, 2, 1}));
}

TEST(Lattice, Spacelike) {
    EXPECT_TRUE(spacelike({3, 0}, {3, 5}));
    EXPECT_FALSE(spacelike({3, 0}, {6, 3}));
    EXPECT_FALSE(spacelike({3, 0}, {7, 1}));
}
