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
#include <numbers>
#include <random>

#include "dense_oracle.hpp"
#include "support.hpp"
#include "lcm/state.hpp"

using namespace lcm;
using namespace support;

namespace {

InitialSpec two_packets(int y, int z) {
    InitialSpec spec;
    ParticleInit p;
    p.packets = {{y, 2.0, Chirality::Right, 1.0}, {z, 2.0, Chirality::Right, 1.0}};
    spec.particles = {p};
    return spec;
}

}  // namespace

TEST(InitialState, SinglePacketIsNormalizedGaussian) {
    auto dyn = make_dynamics(40, 10, 0.1);
    InitialSpec spec;
    ParticleInit p;
    p.packets = {{20, 2.0, Chirality::Right, 1.0}};
    spec.particles = {p};
    auto s = initial_state(dyn, spec);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    auto m = position_mass_marginal(s, {{1.0}, {}});
    double z = 0.0;
    for (int d = -5; d <= 5; ++d) z += std::exp(-d * d / 8.0);
    for (int j = 0; j < 40; ++j) {
        int d = j - 20;
        double expect = std::abs(d) <= 5 ? std::exp(-d * d / 8.0) / z : 0.0;
        EXPECT_NEAR(m[static_cast<size_t>(j)], expect, 1e-14) << j;
    }
}

TEST(InitialState, EqualSuperpositionSplitsMass) {
    auto dyn = make_dynamics(96, 10, 0.1);
    auto s = initial_state(dyn, two_packets(30, 66));
    EXPECT_NEAR(region_probability(s, 0, {24, 36}), 0.5, 1e-6);
    EXPECT_NEAR(region_probability(s, 0, {60, 72}), 0.5, 1e-6);
    auto m = position_mass_marginal(s, {{1.0}, {}});
    double y = 0, z = 0;
    for (int j = 24; j <= 36; ++j) y += m[static_cast<size_t>(j)];
    for (int j = 60; j <= 72; ++j) z += m[static_cast<size_t>(j)];
    EXPECT_NEAR(y, 0.5, 1e-6);
    EXPECT_NEAR(z, 0.5, 1e-6);
}

TEST(InitialState, SingletReducedStateIsMaximallyMixed) {
    auto dyn = make_dynamics(64, 10, 0.1);
    InitialSpec spec;
    spec.spin = true;
    spec.entanglement = SpinEntanglement::Singlet;
    ParticleInit a, b;
    a.packets = {{16, 2.0, Chirality::Right, 1.0}};
    b.packets = {{48, 2.0, Chirality::Right, 1.0}};
    spec.particles = {a, b};
    auto s = initial_state(dyn, spec);
    for (int p = 0; p < 2; ++p) {
        auto rho = reduced_spin_state(s, p);
        EXPECT_NEAR(rho[0].real(), 0.5, 1e-12);
        EXPECT_NEAR(rho[3].real(), 0.5, 1e-12);
        EXPECT_NEAR(std::abs(rho[1]), 0.0, 1e-12);
    }
}

TEST(InitialState, RejectsBadSpecs) {
    auto dyn = make_dynamics(40, 10, 0.1);
    EXPECT_THROW(initial_state(dyn, two_packets(3, 30)), ValidationError);
    EXPECT_THROW(initial_state(dyn, two_packets(15, 20)), ValidationError);
    InitialSpec zero = two_packets(10, 30);
    zero.particles[0].packets[0].coefficient = 0.0;
    zero.particles[0].packets[1].coefficient = 0.0;
    EXPECT_THROW(initial_state(dyn, zero), ValidationError);
    InitialSpec no_spin = two_packets(10, 30);
    EXPECT_THROW(reduced_spin_state(initial_state(dyn, no_spin), 0), ValidationError);
}

TEST(Evolution, MasslessTransport) {
    auto dyn = make_dynamics(32, 12, 0.0);
    InitialSpec spec;
    spec.well_localized = false;
    ParticleInit p;
    p.packets = {{5, 0.3, Chirality::Right, 1.0}};
    spec.particles = {p};
    auto s = initial_state(dyn, spec);
    for (int t : {1, 4, 12}) {
        auto u = advance_to_cut(s, flat_cut(t, 32));
        auto m = position_mass_marginal(u, {{1.0}, {}});
        EXPECT_NEAR(m[static_cast<size_t>(5 + t)], 1.0, 1e-14) << t;
    }
}

TEST(Evolution, FlatAdvanceMatchesDenseLayers) {
    std::mt19937_64 rng(1);
    auto dyn = make_dynamics(8, 8, 0.3);
    auto s = random_state(dyn, 1, false, rng);
    oracle::Model model(*dyn, 1, false);
    oracle::Vec psi = oracle::from_state(s);
    for (int t = 1; t <= 8; ++t) {
        psi = model.full_layer(t) * psi;
        auto u = advance_to_cut(s, flat_cut(t, 8));
        std::vector<cplx> expect(psi.data(), psi.data() + psi.size());
        EXPECT_LT(max_diff(u.canonical_amplitudes(), expect), 1e-12) << t;
    }
}

TEST(Evolution, ArbitraryCutsMatchDenseOracle) {
    std::mt19937_64 rng(2);
    for (int n : {1, 2}) {
        for (bool spin : {false, true}) {
            auto dyn = make_dynamics(8, 8, 0.37);
            dyn->coin_windows = {{3, 4, 1.1}};
            if (spin) {
                dyn->magnets = {{"m0", 0, 2, {1, 4}, 0.9}};
                if (n == 2) dyn->magnets.push_back({"m1", 1, 5, {3, 7}, -0.4});
            }
            auto s = random_state(dyn, n, spin, rng);
            oracle::Model model(*dyn, n, spin);
            auto psi0 = oracle::from_state(s);
            for (int trial = 0; trial < 12; ++trial) {
                Cut target = random_cut(8, 8, rng);
                auto u = advance_to_cut(s, target);
                int top = target.max_height();
                auto top_state = model.time_ordered(psi0, {}, top);
                auto expect = model.on_links(top_state, top, u.canonical_links());
                EXPECT_LT(max_diff(u.canonical_amplitudes(), expect), 1e-10) << "n=" << n << " spin=" << spin;
            }
        }
    }
}

TEST(Evolution, CollapseInsertionMatchesDenseOracle) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> layer(1, 8), site(0, 7), kind(0, 2);
    for (int n : {1, 2}) {
        auto dyn = make_dynamics(8, 8, 0.45);
        auto s = random_state(dyn, n, false, rng);
        oracle::Model model(*dyn, n, false);
        auto psi0 = oracle::from_state(s);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<LocatedOperator> ops;
            for (int k = 0; k < 3; ++k) {
                int lo = site(rng), hi = std::min(7, lo + 3);
                int p = n == 1 ? 0 : k % 2;
                CollapseOperator op = kind(rng) == 0   ? CollapseOperator::complement(p, {lo, hi})
                                      : kind(rng) == 1 ? CollapseOperator::gaussian(p, site(rng), 2.5)
                                                       : CollapseOperator::complement(p, {hi, 7});
                ops.push_back({{layer(rng), site(rng)}, op});
            }
            Cut target = random_cut(8, 8, rng);
            CutState u = s;
            try {
                u = advance_to_cut(s, target, ops);
            } catch (const InconsistentRecord &) {
                continue;
            }
            std::vector<oracle::Op> due;
            int top = target.max_height();
            for (const auto &o : ops) {
                if (o.location.t < target[o.location.j]) {
                    due.push_back(oracle::Op::from(o.location, o.op));
                    top = std::max(top, o.location.t);
                }
            }
            std::stable_sort(due.begin(), due.end(), [](const oracle::Op &a, const oracle::Op &b) { return a.at < b.at; });
            auto top_state = model.time_ordered(psi0, due, top);
            auto expect = model.on_links(top_state, top, u.canonical_links());
            EXPECT_LT(max_diff(u.canonical_amplitudes(), expect), 1e-10) << "n=" << n << " trial=" << trial;
        }
    }
}

TEST(Evolution, ConfluenceOverAdvancementOrders) {
    std::mt19937_64 rng(4);
    auto dyn = make_dynamics(8, 8, 0.2);
    auto s = random_state(dyn, 1, false, rng);
    for (int trial = 0; trial < 10; ++trial) {
        Cut target = random_cut(8, 8, rng);
        auto ref = advance_to_cut(s, target).canonical_amplitudes();
        for (int order = 0; order < 40; ++order) {
            CutState u = s;
            while (u.cut() != target) {
                std::vector<int> movable;
                for (int j = 0; j < 8; ++j) {
                    if (u.cut()[j] < target[j] && u.can_advance(j)) movable.push_back(j);
                }
                ASSERT_FALSE(movable.empty());
                u.advance(movable[std::uniform_int_distribution<size_t>(0, movable.size() - 1)(rng)]);
            }
            EXPECT_LT(max_diff(u.canonical_amplitudes(), ref), 1e-12);
        }
        // A detour above the target and back is also the same state.
        CutState v = s;
        v.move_to(flat_cut(8, 8));
        v.move_to(target);
        EXPECT_LT(max_diff(v.canonical_amplitudes(), ref), 1e-12);
    }
}

TEST(Evolution, ConfluenceExhaustiveSmallTarget) {
    std::mt19937_64 rng(5);
    auto dyn = make_dynamics(8, 4, 0.6);
    auto s = random_state(dyn, 1, false, rng);
    Cut target(std::vector<int>{0, 1, 2, 2, 1, 1, 0, 0});
    auto ref = advance_to_cut(s, target).canonical_amplitudes();
    long orders = 0;
    double worst = 0.0;
    auto dfs = [&](auto &&self, CutState cur) -> void {
        if (cur.cut() == target) {
            ++orders;
            worst = std::max(worst, max_diff(cur.canonical_amplitudes(), ref));
            return;
        }
        for (int j = 0; j < 8; ++j) {
            if (cur.cut()[j] < target[j] && cur.can_advance(j)) {
                CutState next = cur;
                next.advance(j);
                self(self, next);
            }
        }
    };
    dfs(dfs, s);
    EXPECT_GT(orders, 10);
    EXPECT_LT(worst, 1e-12);
}

TEST(Evolution, UnitarityOver256Layers) {
    std::mt19937_64 rng(6);
    auto dyn = make_dynamics(48, 256, 0.1);
    auto s = random_state(dyn, 1, false, rng);
    double worst = 0.0;
    for (int t = 1; t <= 256; ++t) {
        s.move_to(flat_cut(t, 48));
        worst = std::max(worst, std::abs(s.norm_squared() - 1.0));
    }
    EXPECT_LT(worst, 1e-12);
    s.move_to(Cut(std::vector<int>(48, 200)));
    EXPECT_LT(std::abs(s.norm_squared() - 1.0), 1e-12);
}

TEST(Evolution, StrictCausalCone) {
    std::mt19937_64 rng(7);
    const int L = 24;
    for (double theta : {0.1, 0.8, std::numbers::pi / 2}) {
        auto dyn = make_dynamics(L, 10, theta);
        auto s = random_state(dyn, 1, false, rng);
        for (int t : {1, 4, 9}) {
            for (int j : {0, 7, 12, 23}) {
                CutState perturbed = s;
                auto amp = perturbed.amplitudes();
                for (int slot = 0; slot < 2 * L; ++slot) {
                    int site = perturbed.link(slot).j;
                    if (std::abs(site - j) > t) amp[static_cast<size_t>(slot)] *= cplx{-0.3, 1.7};
                }
                auto a = advance_to_cut(s, flat_cut(t, L));
                auto b = advance_to_cut(perturbed, flat_cut(t, L));
                for (auto dir : {Chirality::Right, Chirality::Left}) {
                    int sa = a.slot_of({t, j, dir});
                    int sb = b.slot_of({t, j, dir});
                    ASSERT_GE(sa, 0);
                    EXPECT_LT(std::abs(a.amplitudes()[static_cast<size_t>(sa)] - b.amplitudes()[static_cast<size_t>(sb)]),
                              1e-14);
                }
            }
        }
    }
}

TEST(Collapse, ProjectorBasics) {
    auto dyn = make_dynamics(96, 10, std::numbers::pi / 2);
    auto s = initial_state(dyn, two_packets(30, 66));
    auto [same, w1] = apply_collapse(s, CollapseOperator::projector(0, {0, 95}));
    EXPECT_NEAR(w1, 1.0, 1e-14);
    EXPECT_LT(max_diff(same.canonical_amplitudes(), s.canonical_amplitudes()), 1e-14);
    auto [y, wy] = apply_collapse(s, CollapseOperator::projector(0, {24, 36}));
    EXPECT_NEAR(wy, 0.5, 1e-6);
    EXPECT_NEAR(region_probability(y, 0, {24, 36}), 1.0, 1e-14);
    EXPECT_THROW(apply_collapse(s, CollapseOperator::projector(0, {45, 50})), InconsistentRecord);
    EXPECT_THROW(apply_collapse(s, CollapseOperator::projector(1, {45, 50})), ValidationError);
}

TEST(Collapse, ProjectorPairsAreComplete) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> site(0, 15);
    for (int trial = 0; trial < 50; ++trial) {
        auto dyn = make_dynamics(16, 6, 0.3);
        auto s = random_state(dyn, 2, trial % 2 == 0, rng);
        int lo = site(rng), hi = std::max(lo, site(rng));
        int p = trial % 2;
        double a = collapse_weight(s, CollapseOperator::projector(p, {lo, hi}));
        double b = collapse_weight(s, CollapseOperator::complement(p, {lo, hi}));
        EXPECT_NEAR(a + b, 1.0, 1e-12);
    }
}

TEST(Collapse, AdvanceErrors) {
    auto dyn = make_dynamics(16, 8, 0.3);
    std::mt19937_64 rng(9);
    auto s = random_state(dyn, 1, false, rng);
    auto up = advance_to_cut(s, flat_cut(4, 16));
    EXPECT_THROW(advance_to_cut(up, flat_cut(2, 16)), ValidationError);
    std::vector<LocatedOperator> stale{{{2, 5}, CollapseOperator::complement(0, {0, 3})}};
    EXPECT_THROW(advance_to_cut(up, flat_cut(6, 16), stale), ValidationError);
}

TEST(Marginals, TotalsAndPointers) {
    std::mt19937_64 rng(10);
    auto dyn = make_dynamics(12, 6, 0.3);
    auto s = random_state(dyn, 2, true, rng);
    s.pointers() = {{1, 2, false}, {3, 4, true}};
    MassAssignment m{{1.5, 0.5}, {2.0, 3.0}};
    auto u = advance_to_cut(s, random_cut(12, 6, rng));
    auto marg = position_mass_marginal(u, m);
    double total = 0.0;
    for (double v : marg) {
        EXPECT_GE(v, 0.0);
        total += v;
    }
    EXPECT_NEAR(total, 1.5 + 0.5 + 2.0 + 3.0, 1e-10);
    EXPECT_NEAR(pointer_mass_at(u, 1, m), 2.0, 0.0);
    EXPECT_NEAR(pointer_mass_at(u, 4, m), 3.0, 0.0);
    EXPECT_NEAR(pointer_mass_at(u, 2, m), 0.0, 0.0);
}

TEST(Marginals, ProductStateIsSumOfSingles) {
    auto dyn = make_dynamics(64, 20, 0.2);
    InitialSpec two;
    ParticleInit a, b;
    a.packets = {{16, 2.0, Chirality::Right, 1.0}};
    b.packets = {{44, 3.0, Chirality::Left, 1.0}};
    two.particles = {a, b};
    InitialSpec one_a, one_b;
    one_a.particles = {a};
    one_b.particles = {b};
    Cut cut(std::vector<int>(64, 0));
    std::vector<int> f(64);
    for (int j = 0; j < 64; ++j) f[static_cast<size_t>(j)] = 10 + (j % 4 == 0 ? 1 : 0);
    cut = Cut(f);
    auto m2 = position_mass_marginal(advance_to_cut(initial_state(dyn, two), cut), {{1.0, 2.0}, {}});
    auto ma = position_mass_marginal(advance_to_cut(initial_state(dyn, one_a), cut), {{1.0}, {}});
    auto mb = position_mass_marginal(advance_to_cut(initial_state(dyn, one_b), cut), {{2.0}, {}});
    for (size_t j = 0; j < 64; ++j) EXPECT_NEAR(m2[j], ma[j] + mb[j], 1e-12);
}

TEST(Marginals, HypersurfaceIndependenceWithoutCollapse) {
    std::mt19937_64 rng(11);
    const int L = 10, T = 10;
    for (int n : {1, 2}) {
        auto dyn = make_dynamics(L, T, 0.35);
        auto s = random_state(dyn, n, n == 2, rng);
        MassAssignment m{std::vector<double>(static_cast<size_t>(n), 1.0), {}};
        int checked = 0;
        for (int trial = 0; trial < 200; ++trial) {
            Cut a = random_cut(L, T, rng);
            int j = std::uniform_int_distribution<int>(0, L - 1)(rng);
            Event x{a[j], j};
            // Both output links of x must cross the cut.
            if ((j > 0 && a[j - 1] > x.t) || (j + 1 < L && a[j + 1] > x.t)) continue;
            ++checked;
            auto sa = advance_to_cut(s, a);
            auto sf = advance_to_cut(s, flat_cut(x.t, L));
            EXPECT_NEAR(event_mass(sa, x, m), event_mass(sf, x, m), 1e-10);
            // Marginals agree when the cuts also agree on both neighbours.
            std::vector<int> g(static_cast<size_t>(L));
            for (int q = 0; q < L; ++q) g[static_cast<size_t>(q)] = std::max(0, a[j] - std::max(0, std::abs(q - j) - 1));
            for (int q = j - 1; q <= j + 1; ++q) {
                if (q >= 0 && q < L) g[static_cast<size_t>(q)] = a[q];
            }
            bool valid = true;
            for (int q = 1; q < L; ++q) valid = valid && std::abs(g[static_cast<size_t>(q)] - g[static_cast<size_t>(q - 1)]) <= 1;
            if (!valid) continue;
            Cut b(g);
            auto ma = position_mass_marginal(sa, m);
            auto mb = position_mass_marginal(advance_to_cut(s, b), m);
            EXPECT_NEAR(ma[static_cast<size_t>(j)], mb[static_cast<size_t>(j)], 1e-10);
        }
        EXPECT_GT(checked, 20);
    }
}

TEST(SpinState, PurityBounds) {
    std::mt19937_64 rng(12);
    auto dyn = make_dynamics(6, 4, 0.3);
    for (int trial = 0; trial < 30; ++trial) {
        auto s = random_state(dyn, 2, true, rng);
        auto rho = reduced_spin_state(s, trial % 2);
        double tr = rho[0].real() + rho[3].real();
        double purity = 0.0;
        for (auto v : rho) purity += std::norm(v);
        EXPECT_NEAR(tr, 1.0, 1e-12);
        EXPECT_GE(purity, 0.5 - 1e-12);
        EXPECT_LE(purity, 1.0 + 1e-12);
        EXPECT_GE(rho[0].real(), -1e-15);
        EXPECT_GE(rho[0].real() * rho[3].real() - std::norm(rho[1]), -1e-12);
    }
}
