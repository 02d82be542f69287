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

#include "lcm/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace lcm {

std::string to_string(const Event &e) {
    return "(" + std::to_string(e.t) + "," + std::to_string(e.j) + ")";
}

void Lattice::require(const Event &e) const {
    if (!contains(e)) {
        throw ValidationError("event " + to_string(e) + " outside lattice L=" + std::to_string(L) +
                              " T=" + std::to_string(T));
    }
}

Rational Rational::parse(const std::string &text) {
    Rational r;
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            r.num = std::stoll(text.substr(0, slash));
            r.den = std::stoll(text.substr(slash + 1));
        } else {
            // Decimal: scale by the number of fractional digits.
            auto dot = text.find('.');
            std::string digits = text;
            r.den = 1;
            if (dot != std::string::npos) {
                digits = text.substr(0, dot) + text.substr(dot + 1);
                for (size_t k = dot + 1; k < text.size(); ++k) r.den *= 10;
            }
            r.num = std::stoll(digits);
        }
    } catch (const std::exception &) {
        throw ValidationError("malformed velocity '" + text + "'");
    }
    if (r.den == 0) throw ValidationError("velocity denominator is zero");
    if (r.den < 0) {
        r.den = -r.den;
        r.num = -r.num;
    }
    auto g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

Cut::Cut(std::vector<int> heights) : f_(std::move(heights)) {
    if (f_.empty()) throw ValidationError("cut must have at least one site");
    for (size_t j = 0; j < f_.size(); ++j) {
        if (f_[j] < 0) throw ValidationError("cut height negative at site " + std::to_string(j));
        if (j + 1 < f_.size() && std::abs(f_[j + 1] - f_[j]) > 1) {
            throw ValidationError("cut not lattice-causal between sites " + std::to_string(j) +
                                  " and " + std::to_string(j + 1));
        }
    }
}

int Cut::min_height() const { return *std::min_element(f_.begin(), f_.end()); }
int Cut::max_height() const { return *std::max_element(f_.begin(), f_.end()); }

bool causal_past(const Event &e, const Event &e0) {
    int dt = e.t - e0.t;
    return dt > 0 && std::abs(e.j - e0.j) < dt;
}

bool spacelike(const Event &a, const Event &b) { return std::abs(a.j - b.j) > std::abs(a.t - b.t); }

Cut plc(const Event &x, int L) {
    std::vector<int> f(static_cast<size_t>(L));
    for (int j = 0; j < L; ++j) f[static_cast<size_t>(j)] = std::max(0, x.t - std::abs(x.j - j));
    return Cut(std::move(f));
}

Cut flat_cut(int t, int L) { return Cut(std::vector<int>(static_cast<size_t>(L), t)); }

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

Cut boosted_cut(const Rational &v, const Event &anchor, const Lattice &lattice) {
    if (v.den <= 0 || std::abs(v.num) >= v.den) {
        throw ValidationError("boost velocity must satisfy |v| < 1");
    }
    std::vector<int> f(static_cast<size_t>(lattice.L));
    for (int j = 0; j < lattice.L; ++j) {
        // floor(v (j - j0) + 1/2) in exact integer arithmetic.
        std::int64_t k = j - anchor.j;
        std::int64_t step = floor_div(2 * v.num * k + v.den, 2 * v.den);
        std::int64_t h = anchor.t + step;
        f[static_cast<size_t>(j)] = static_cast<int>(std::clamp<std::int64_t>(h, 0, lattice.T));
    }
    // Left-to-right repair of any |df| > 1.
    for (size_t j = 1; j < f.size(); ++j) f[j] = std::clamp(f[j], f[j - 1] - 1, f[j - 1] + 1);
    return Cut(std::move(f));
}

bool cut_leq(const Cut &a, const Cut &b) {
    if (a.width() != b.width()) throw ValidationError("cut widths differ");
    for (int j = 0; j < a.width(); ++j) {
        if (a[j] > b[j]) return false;
    }
    return true;
}

bool event_below(const Cut &cut, const Event &e) {
    if (e.j < 0 || e.j >= cut.width()) throw ValidationError("event site outside cut");
    return e.t < cut[e.j];
}

Cut cut_max(const Cut &a, const Cut &b) {
    if (a.width() != b.width()) throw ValidationError("cut widths differ");
    std::vector<int> f(static_cast<size_t>(a.width()));
    for (int j = 0; j < a.width(); ++j) f[static_cast<size_t>(j)] = std::max(a[j], b[j]);
    return Cut(std::move(f));
}

Cut cut_min(const Cut &a, const Cut &b) {
    if (a.width() != b.width()) throw ValidationError("cut widths differ");
    std::vector<int> f(static_cast<size_t>(a.width()));
    for (int j = 0; j < a.width(); ++j) f[static_cast<size_t>(j)] = std::min(a[j], b[j]);
    return Cut(std::move(f));
}

}  // namespace lcm
