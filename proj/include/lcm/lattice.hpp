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

#ifndef LCM_LATTICE_HPP
#define LCM_LATTICE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

/// Discrete 1+1D Minkowski geometry. Light speed is one site per layer.
namespace lcm {

/// Raised when a value violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// A spacetime point of the lattice: layer t, site j.
struct Event {
    int t = 0;
    int j = 0;

    friend bool operator==(const Event &, const Event &) = default;
    /// Lattice-frame order: by layer, ties broken by site.
    friend bool operator<(const Event &a, const Event &b) {
        return a.t != b.t ? a.t < b.t : a.j < b.j;
    }
};

std::string to_string(const Event &e);

/// Lattice extent: sites [0, L), layers [0, T].
struct Lattice {
    int L = 0;
    int T = 0;

    friend bool operator==(const Lattice &, const Lattice &) = default;

    bool contains(const Event &e) const {
        return e.t >= 0 && e.t <= T && e.j >= 0 && e.j < L;
    }
    void require(const Event &e) const;
};

/// Closed site interval [lo, hi].
struct Region {
    int lo = 0;
    int hi = 0;

    bool contains(int j) const { return j >= lo && j <= hi; }
    int width() const { return hi - lo + 1; }
    friend bool operator==(const Region &, const Region &) = default;
};

/// Exact rational velocity used for boosted cuts.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational parse(const std::string &text);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Staircase hypersurface t = f(j) with |f(j+1) - f(j)| <= 1 and f >= 0.
class Cut {
   public:
    Cut() = default;
    explicit Cut(std::vector<int> heights);

    int width() const { return static_cast<int>(f_.size()); }
    int operator[](int j) const { return f_[static_cast<size_t>(j)]; }
    const std::vector<int> &heights() const { return f_; }
    int min_height() const;
    int max_height() const;
    bool is_flat() const { return min_height() == max_height(); }

    /// True iff e lies on this cut (e.t == f(e.j)).
    bool passes_through(const Event &e) const { return (*this)[e.j] == e.t; }

    friend bool operator==(const Cut &, const Cut &) = default;

   private:
    friend class CutState;
    std::vector<int> f_;
};

/// e0 lies strictly inside the past cone of e: |e0.j - e.j| < e.t - e0.t.
/// Events on the cone surface are excluded, matching event_below(plc(e), e0).
bool causal_past(const Event &e, const Event &e0);

/// Distinct events that no lattice signal can connect: |dj| > |dt|.
bool spacelike(const Event &a, const Event &b);

/// Past light cone of x joined with the initial cut outside it:
/// f(j) = max(0, x.t - |x.j - j|).
Cut plc(const Event &x, int L);

Cut flat_cut(int t, int L);

/// Staircase rounding of t = anchor.t + v (j - anchor.j), clipped to
/// [0, T]. Rejects |v| >= 1.
Cut boosted_cut(const Rational &v, const Event &anchor, const Lattice &lattice);

/// Pointwise a <= b. Throws on width mismatch.
bool cut_leq(const Cut &a, const Cut &b);

/// e strictly below the cut: e.t < f(e.j). Events on the cut are not below.
bool event_below(const Cut &cut, const Event &e);

Cut cut_max(const Cut &a, const Cut &b);
Cut cut_min(const Cut &a, const Cut &b);

}  // namespace lcm

#endif
