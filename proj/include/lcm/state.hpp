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

#ifndef LCM_STATE_HPP
#define LCM_STATE_HPP

#include <algorithm>
#include <array>
#include <complex>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcm/lattice.hpp"

namespace lcm {

using cplx = std::complex<double>;

/// A collapse selected a branch whose Born weight is numerically zero.
class InconsistentRecord : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

enum class Chirality { Right, Left };

/// Overrides the coin angle for events on layers [begin, end].
struct CoinWindow {
    int begin = 0;
    int end = 0;
    double theta = 0.0;

    friend bool operator==(const CoinWindow &, const CoinWindow &) = default;
};

/// Stern-Gerlach magnet: on every event (layer, j in window) the target
/// particle's spin is rotated so that the +angle direction becomes up, then
/// the down component has its chirality flipped. Up leaves as a right-mover.
struct MagnetGate {
    std::string id;
    int particle = 0;
    int layer = 1;
    Region window;
    double angle = 0.0;

    friend bool operator==(const MagnetGate &, const MagnetGate &) = default;
};

/// Local rules of the Dirac walk. Each event takes the right-mover arriving
/// from j-1 and the left-mover arriving from j+1 (edges reflect), applies the
/// coin [[cos, -i sin], [-i sin, cos]] and emits a right- and a left-mover.
struct Dynamics {
    Lattice lattice;
    double theta = 0.1;
    std::vector<CoinWindow> coin_windows;
    std::vector<MagnetGate> magnets;

    double coin_angle(int layer) const;
    void validate() const;
};

/// Pointer qubit of a detector. Its mass sits on ready_site or fired_site.
struct Pointer {
    int ready_site = 0;
    int fired_site = 0;
    bool fired = false;

    int display_site() const { return fired ? fired_site : ready_site; }
};

enum class OperatorKind { Projector, ComplementProjector, GaussianHit };

/// Site-diagonal reduction operator acting on one particle. A projector may
/// carry a pointer that it flips to fired.
struct CollapseOperator {
    OperatorKind kind = OperatorKind::Projector;
    int particle = 0;
    Region region;
    double center = 0.0;
    double sigma = 1.0;
    int pointer = -1;

    /// Multiplier applied to every amplitude of the particle at site j.
    double profile(int j) const;
    /// Smallest interval outside which profile == 1.
    Region support(int L) const;

    static CollapseOperator projector(int particle, Region region, int pointer = -1);
    static CollapseOperator complement(int particle, Region region);
    static CollapseOperator gaussian(int particle, double center, double sigma);
};

/// An operator pinned to a spacetime location, acting on that layer.
struct LocatedOperator {
    Event location;
    CollapseOperator op;
};

struct MassAssignment {
    std::vector<double> particle;  // m_i
    std::vector<double> pointer;   // m_det per detector

    void validate(int particles, int pointers) const;
};

/// A crossing link: the output of event (t, j) in direction dir.
struct Link {
    int t = 0;
    int j = 0;
    Chirality dir = Chirality::Right;

    friend bool operator==(const Link &, const Link &) = default;
};

/// Wave function of N particles (chirality x optional spin) anchored to a
/// cut, plus classical pointer states. Amplitudes live on the 2L links that
/// cross the cut; advancing an event rewrites its two input slots in place.
class CutState {
   public:
    CutState(std::shared_ptr<const Dynamics> dynamics, int particles, bool spin);

    const Dynamics &dynamics() const { return *dyn_; }
    std::shared_ptr<const Dynamics> dynamics_ptr() const { return dyn_; }
    int L() const { return dyn_->lattice.L; }
    const Cut &cut() const { return cut_; }
    int particles() const { return n_; }
    bool spin() const { return spin_dim_ == 2; }
    int spin_dim() const { return spin_dim_; }
    /// Per-particle dimension: 2L links times spin.
    size_t particle_dim() const { return dim_; }
    size_t stride(int particle) const { return strides_[static_cast<size_t>(particle)]; }

    std::span<const cplx> amplitudes() const { return amp_; }
    std::span<cplx> amplitudes() { return amp_; }
    double norm_squared() const;
    void normalize();

    const std::vector<Pointer> &pointers() const { return pointers_; }
    std::vector<Pointer> &pointers() { return pointers_; }

    /// Highest layer of any collapse applied so far, -1 if none.
    int last_collapse_layer() const { return last_collapse_layer_; }
    void note_collapse(int layer) { last_collapse_layer_ = std::max(last_collapse_layer_, layer); }

    Link link(int slot) const { return links_[static_cast<size_t>(slot)]; }
    /// Slot holding the given link, or -1 if it does not cross the cut.
    int slot_of(const Link &link) const;

    bool can_advance(int j) const;
    /// Performs event (f(j)+1, j).
    void advance(int j);
    bool can_retreat(int j) const;
    /// Undoes event (f(j), j).
    void retreat(int j);
    /// Moves the cut anywhere by unitary advance/retreat steps.
    void move_to(const Cut &target);

    /// Amplitudes re-indexed by canonical link order (site, direction, layer),
    /// so states reached through different move orders compare elementwise.
    std::vector<cplx> canonical_amplitudes() const;
    std::vector<Link> canonical_links() const;

   private:
    struct Entry {
        int layer;
        int slot;
    };
    // Crossing links grouped by source site, oldest first (at most two).
    struct SiteLinks {
        std::array<Entry, 2> e{};
        int n = 0;
        void push_back(Entry x) { e[static_cast<size_t>(n++)] = x; }
        void push_front(Entry x) {
            e[1] = e[0];
            e[0] = x;
            ++n;
        }
        Entry pop_front() {
            Entry x = e[0];
            e[0] = e[1];
            --n;
            return x;
        }
        Entry pop_back() { return e[static_cast<size_t>(--n)]; }
    };

    void apply_event(int j, int layer, bool inverse, int slot_a, int slot_b);

    std::shared_ptr<const Dynamics> dyn_;
    int n_ = 1;
    int spin_dim_ = 1;
    size_t dim_ = 0;
    std::vector<size_t> strides_;
    Cut cut_;
    std::vector<SiteLinks> right_;
    std::vector<SiteLinks> left_;
    std::vector<Link> links_;
    std::vector<cplx> amp_;
    std::vector<Pointer> pointers_;
    int last_collapse_layer_ = -1;
};

struct PacketTerm {
    int center = 0;
    double sigma = 2.0;
    Chirality chirality = Chirality::Right;
    cplx coefficient{1.0, 0.0};

    friend bool operator==(const PacketTerm &, const PacketTerm &) = default;
};

struct ParticleInit {
    std::vector<PacketTerm> packets;
    std::array<cplx, 2> spin{cplx{1.0, 0.0}, cplx{0.0, 0.0}};

    friend bool operator==(const ParticleInit &, const ParticleInit &) = default;
};

enum class SpinEntanglement { Product, Singlet };

struct InitialSpec {
    bool spin = false;
    std::vector<ParticleInit> particles;
    SpinEntanglement entanglement = SpinEntanglement::Product;
    std::vector<Pointer> pointers;
    /// Enforce edge margins and 6 sigma packet separation.
    bool well_localized = true;
};

/// Half-width of the truncated Gaussian packet profile.
int packet_half_width(double sigma);
/// Normalized profile exp(-(j-c)^2 / 4 sigma^2) on |j - c| <= half width.
std::vector<std::pair<int, double>> packet_profile(int center, double sigma);

CutState initial_state(std::shared_ptr<const Dynamics> dynamics, const InitialSpec &spec);

/// Returns (L psi / |L psi|, |L psi|^2) acting on the links of the current
/// cut by source site. Throws InconsistentRecord below 1e-15.
std::pair<CutState, double> apply_collapse(const CutState &state, const CollapseOperator &op);
/// In-place variant. With layer >= 0 only links emitted on that layer are
/// touched, which is how time-ordered evolution applies an operator.
double apply_collapse_in_place(CutState &state, const CollapseOperator &op, int layer = -1);
/// |L psi|^2 without modifying the state.
double collapse_weight(const CutState &state, const CollapseOperator &op, int layer = -1);

/// Evolves to target. Operators whose location lies strictly below target
/// are applied on their own layer in time order; the rest are ignored. The
/// state is renormalized after each operator.
CutState advance_to_cut(const CutState &state, const Cut &target,
                        std::span<const LocatedOperator> operators = {});

/// Mass per site: every crossing link is attributed to its source site.
std::vector<double> position_mass_marginal(const CutState &state, const MassAssignment &masses);
/// Particle mass carried by the two output links of x, if they cross the cut.
double event_mass(const CutState &state, const Event &x, const MassAssignment &masses);
/// Pointer masses displayed at site j.
double pointer_mass_at(const CutState &state, int j, const MassAssignment &masses);
/// Total probability of particle p on links whose source site is in region.
double region_probability(const CutState &state, int particle, const Region &region);

/// 2x2 reduced spin density matrix, row-major.
std::array<cplx, 4> reduced_spin_state(const CutState &state, int particle);

}  // namespace lcm

#endif
