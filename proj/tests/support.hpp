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

#ifndef LCM_TESTS_SUPPORT_HPP
#define LCM_TESTS_SUPPORT_HPP

#include <algorithm>
#include <memory>
#include <random>
#include <vector>

#include "lcm/state.hpp"

namespace support {

inline std::shared_ptr<lcm::Dynamics> make_dynamics(int L, int T, double theta) {
    auto d = std::make_shared<lcm::Dynamics>();
    d->lattice = {L, T};
    d->theta = theta;
    return d;
}

/// Gaussian random amplitudes on the initial cut, normalized.
inline lcm::CutState random_state(std::shared_ptr<const lcm::Dynamics> dyn, int n, bool spin, std::mt19937_64 &rng) {
    lcm::CutState s(std::move(dyn), n, spin);
    std::normal_distribution<double> g;
    for (auto &a : s.amplitudes()) a = {g(rng), g(rng)};
    s.normalize();
    return s;
}

/// Random walk of heights with steps in {-1, 0, 1}, clamped to [0, T].
inline lcm::Cut random_cut(int L, int T, std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> start(0, T), step(-1, 1);
    std::vector<int> f(static_cast<size_t>(L));
    f[0] = start(rng);
    for (size_t j = 1; j < f.size(); ++j) f[j] = std::clamp(f[j - 1] + step(rng), 0, T);
    return lcm::Cut(std::move(f));
}

inline double max_diff(const std::vector<lcm::cplx> &a, const std::vector<lcm::cplx> &b) {
    if (a.size() != b.size()) return 1e300;
    double m = 0.0;
    for (size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace support

#endif
