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

#include "lcm/state.hpp"

#include <cmath>
#include <numeric>

namespace lcm {

namespace {

constexpr double kNegligibleWeight = 1e-15;

size_t ipow(size_t base, int exp) {
    size_t r = 1;
    for (int k = 0; k < exp; ++k) r *= base;
    return r;
}

}  // namespace

double Dynamics::coin_angle(int layer) const {
    for (const auto &w : coin_windows) {
        if (layer >= w.begin && layer <= w.end) return w.theta;
    }
    return theta;
}

void Dynamics::validate() const {
    if (lattice.L < 1) throw ValidationError("lattice width L must be >= 1");
    if (lattice.T < 0) throw ValidationError("lattice depth T must be >= 0");
    for (const auto &w : coin_windows) {
        if (w.begin > w.end || w.begin < 1) throw ValidationError("coin window must satisfy 1 <= begin <= end");
    }
    for (const auto &m : magnets) {
        if (m.layer < 1 || m.layer > lattice.T) throw ValidationError("magnet '" + m.id + "' layer outside lattice");
        if (m.window.lo < 0 || m.window.hi >= lattice.L || m.window.lo > m.window.hi) {
            throw ValidationError("magnet '" + m.id + "' window outside lattice");
        }
    }
}

double CollapseOperator::profile(int j) const {
    switch (kind) {
        case OperatorKind::Projector:
            return region.contains(j) ? 1.0 : 0.0;
        case OperatorKind::ComplementProjector:
            return region.contains(j) ? 0.0 : 1.0;
        case OperatorKind::GaussianHit: {
            double d = static_cast<double>(j) - center;
            return std::exp(-d * d / (4.0 * sigma * sigma));
        }
    }
    return 1.0;
}

Region CollapseOperator::support(int L) const {
    if (kind == OperatorKind::ComplementProjector) return region;
    return Region{0, L - 1};
}

CollapseOperator CollapseOperator::projector(int particle, Region region, int pointer) {
    CollapseOperator op;
    op.kind = OperatorKind::Projector;
    op.particle = particle;
    op.region = region;
    op.pointer = pointer;
    return op;
}

CollapseOperator CollapseOperator::complement(int particle, Region region) {
    CollapseOperator op;
    op.kind = OperatorKind::ComplementProjector;
    op.particle = particle;
    op.region = region;
    return op;
}

CollapseOperator CollapseOperator::gaussian(int particle, double center, double sigma) {
    CollapseOperator op;
    op.kind = OperatorKind::GaussianHit;
    op.particle = particle;
    op.center = center;
    op.sigma = sigma;
    return op;
}

void MassAssignment::validate(int particles, int pointers) const {
    if (static_cast<int>(particle.size()) != particles) throw ValidationError("one mass per particle required");
    if (static_cast<int>(pointer.size()) != pointers) throw ValidationError("one mass per pointer required");
    for (double m : particle) {
        if (!(m > 0)) throw ValidationError("particle masses must be positive");
    }
    for (double m : pointer) {
        if (!(m > 0)) throw ValidationError("pointer masses must be positive");
    }
}

CutState::CutState(std::shared_ptr<const Dynamics> dynamics, int particles, bool spin)
    : dyn_(std::move(dynamics)), n_(particles), spin_dim_(spin ? 2 : 1) {
    if (!dyn_) throw ValidationError("dynamics required");
    dyn_->validate();
    if (n_ < 1) throw ValidationError("at least one particle required");
    if (!dyn_->magnets.empty() && !spin) throw ValidationError("magnets require spin");
    const int L = dyn_->lattice.L;
    dim_ = static_cast<size_t>(2 * L * spin_dim_);
    strides_.resize(static_cast<size_t>(n_));
    for (int p = 0; p < n_; ++p) strides_[static_cast<size_t>(p)] = ipow(dim_, n_ - 1 - p);
    cut_ = flat_cut(0, L);
    right_.resize(static_cast<size_t>(L));
    left_.resize(static_cast<size_t>(L));
    links_.resize(static_cast<size_t>(2 * L));
    for (int j = 0; j < L; ++j) {
        right_[static_cast<size_t>(j)].push_back({0, 2 * j});
        left_[static_cast<size_t>(j)].push_back({0, 2 * j + 1});
        links_[static_cast<size_t>(2 * j)] = {0, j, Chirality::Right};
        links_[static_cast<size_t>(2 * j + 1)] = {0, j, Chirality::Left};
    }
    amp_.assign(ipow(dim_, n_), cplx{0.0, 0.0});
}

double CutState::norm_squared() const {
    double s = 0.0;
    for (const auto &a : amp_) s += std::norm(a);
    return s;
}

void CutState::normalize() {
    double n2 = norm_squared();
    if (n2 < kNegligibleWeight) throw InconsistentRecord("cannot normalize a null state");
    double inv = 1.0 / std::sqrt(n2);
    for (auto &a : amp_) a *= inv;
}

int CutState::slot_of(const Link &link) const {
    if (link.j < 0 || link.j >= L()) return -1;
    const auto &site = link.dir == Chirality::Right ? right_[static_cast<size_t>(link.j)]
                                                    : left_[static_cast<size_t>(link.j)];
    for (int k = 0; k < site.n; ++k) {
        if (site.e[static_cast<size_t>(k)].layer == link.t) return site.e[static_cast<size_t>(k)].slot;
    }
    return -1;
}

bool CutState::can_advance(int j) const {
    const int L = this->L();
    int f = cut_[j];
    if (f + 1 > dyn_->lattice.T) return false;
    if (j > 0 && cut_[j - 1] < f) return false;
    if (j < L - 1 && cut_[j + 1] < f) return false;
    return true;
}

bool CutState::can_retreat(int j) const {
    const int L = this->L();
    int f = cut_[j];
    if (f < 1) return false;
    if (j > 0 && cut_[j - 1] > f) return false;
    if (j < L - 1 && cut_[j + 1] > f) return false;
    return true;
}

void CutState::advance(int j) {
    if (!can_advance(j)) throw ValidationError("cannot advance site " + std::to_string(j));
    const int L = this->L();
    const int f = cut_[j];
    auto uj = static_cast<size_t>(j);
    Entry in_left = j > 0 ? right_[uj - 1].pop_front() : left_[0].pop_front();
    Entry in_right = j < L - 1 ? left_[uj + 1].pop_front() : right_[static_cast<size_t>(L - 1)].pop_front();
    apply_event(j, f + 1, false, in_left.slot, in_right.slot);
    right_[uj].push_back({f + 1, in_left.slot});
    left_[uj].push_back({f + 1, in_right.slot});
    links_[static_cast<size_t>(in_left.slot)] = {f + 1, j, Chirality::Right};
    links_[static_cast<size_t>(in_right.slot)] = {f + 1, j, Chirality::Left};
    cut_.f_[uj] = f + 1;
}

void CutState::retreat(int j) {
    if (!can_retreat(j)) throw ValidationError("cannot retreat site " + std::to_string(j));
    const int L = this->L();
    const int f = cut_[j];
    auto uj = static_cast<size_t>(j);
    Entry out_r = right_[uj].pop_back();
    Entry out_l = left_[uj].pop_back();
    apply_event(j, f, true, out_r.slot, out_l.slot);
    if (j > 0) {
        right_[uj - 1].push_front({f - 1, out_r.slot});
        links_[static_cast<size_t>(out_r.slot)] = {f - 1, j - 1, Chirality::Right};
    } else {
        left_[0].push_front({f - 1, out_r.slot});
        links_[static_cast<size_t>(out_r.slot)] = {f - 1, 0, Chirality::Left};
    }
    if (j < L - 1) {
        left_[uj + 1].push_front({f - 1, out_l.slot});
        links_[static_cast<size_t>(out_l.slot)] = {f - 1, j + 1, Chirality::Left};
    } else {
        right_[static_cast<size_t>(L - 1)].push_front({f - 1, out_l.slot});
        links_[static_cast<size_t>(out_l.slot)] = {f - 1, L - 1, Chirality::Right};
    }
    cut_.f_[uj] = f - 1;
}

void CutState::apply_event(int j, int layer, bool inverse, int slot_a, int slot_b) {
    const double theta = dyn_->coin_angle(layer);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const cplx off{0.0, inverse ? s : -s};
    const size_t S = static_cast<size_t>(spin_dim_);
    for (int p = 0; p < n_; ++p) {
        const MagnetGate *gate = nullptr;
        for (const auto &m : dyn_->magnets) {
            if (m.particle == p && m.layer == layer && m.window.contains(j)) gate = &m;
        }
        const size_t stride = strides_[static_cast<size_t>(p)];
        const size_t block = dim_ * stride;
        const size_t outer_count = amp_.size() / block;
        const size_t base_a = static_cast<size_t>(slot_a) * S * stride;
        const size_t base_b = static_cast<size_t>(slot_b) * S * stride;
        double gc = 0.0, gs = 0.0;
        if (gate) {
            gc = std::cos(gate->angle / 2.0);
            gs = std::sin(gate->angle / 2.0);
        }
        for (size_t outer = 0; outer < outer_count; ++outer) {
            cplx *blk = amp_.data() + outer * block;
            for (size_t inner = 0; inner < stride; ++inner) {
                if (!gate) {
                    for (size_t sp = 0; sp < S; ++sp) {
                        cplx &a = blk[base_a + sp * stride + inner];
                        cplx &b = blk[base_b + sp * stride + inner];
                        cplx na = c * a + off * b;
                        cplx nb = off * a + c * b;
                        a = na;
                        b = nb;
                    }
                    continue;
                }
                cplx &au = blk[base_a + inner];
                cplx &ad = blk[base_a + stride + inner];
                cplx &bu = blk[base_b + inner];
                cplx &bd = blk[base_b + stride + inner];
                auto coin = [&](cplx &x, cplx &y) {
                    cplx nx = c * x + off * y;
                    cplx ny = off * x + c * y;
                    x = nx;
                    y = ny;
                };
                auto rotate = [&](cplx &up, cplx &down, bool transpose) {
                    double sg = transpose ? -gs : gs;
                    cplx nu = gc * up + sg * down;
                    cplx nd = -sg * up + gc * down;
                    up = nu;
                    down = nd;
                };
                if (!inverse) {
                    coin(au, bu);
                    coin(ad, bd);
                    rotate(au, ad, false);
                    rotate(bu, bd, false);
                    std::swap(ad, bd);
                } else {
                    std::swap(ad, bd);
                    rotate(au, ad, true);
                    rotate(bu, bd, true);
                    coin(au, bu);
                    coin(ad, bd);
                }
            }
        }
    }
}

void CutState::move_to(const Cut &target) {
    const int L = this->L();
    if (target.width() != L) throw ValidationError("cut widths differ");
    if (target.max_height() > dyn_->lattice.T) throw ValidationError("cut exceeds lattice depth");
    // Lower every site above target, highest level first.
    for (;;) {
        int level = -1;
        for (int j = 0; j < L; ++j) {
            if (cut_[j] > target[j]) level = std::max(level, cut_[j]);
        }
        if (level < 0) break;
        for (int j = 0; j < L; ++j) {
            if (cut_[j] == level && cut_[j] > target[j]) retreat(j);
        }
    }
    // Raise every site below target, lowest level first.
    for (;;) {
        int level = -1;
        for (int j = 0; j < L; ++j) {
            if (cut_[j] < target[j] && (level < 0 || cut_[j] < level)) level = cut_[j];
        }
        if (level < 0) break;
        for (int j = 0; j < L; ++j) {
            if (cut_[j] == level && cut_[j] < target[j]) advance(j);
        }
    }
}

std::vector<Link> CutState::canonical_links() const {
    std::vector<Link> out;
    out.reserve(links_.size());
    for (int j = 0; j < L(); ++j) {
        const auto &r = right_[static_cast<size_t>(j)];
        for (int k = 0; k < r.n; ++k) out.push_back({r.e[static_cast<size_t>(k)].layer, j, Chirality::Right});
        const auto &l = left_[static_cast<size_t>(j)];
        for (int k = 0; k < l.n; ++k) out.push_back({l.e[static_cast<size_t>(k)].layer, j, Chirality::Left});
    }
    return out;
}

std::vector<cplx> CutState::canonical_amplitudes() const {
    // position[slot] = canonical index of the link stored in that slot.
    std::vector<size_t> position(links_.size());
    size_t k = 0;
    for (int j = 0; j < L(); ++j) {
        const auto &r = right_[static_cast<size_t>(j)];
        for (int q = 0; q < r.n; ++q) position[static_cast<size_t>(r.e[static_cast<size_t>(q)].slot)] = k++;
        const auto &l = left_[static_cast<size_t>(j)];
        for (int q = 0; q < l.n; ++q) position[static_cast<size_t>(l.e[static_cast<size_t>(q)].slot)] = k++;
    }
    const size_t S = static_cast<size_t>(spin_dim_);
    std::vector<cplx> out(amp_.size());
    for (size_t idx = 0; idx < amp_.size(); ++idx) {
        size_t rest = idx;
        size_t mapped = 0;
        for (int p = 0; p < n_; ++p) {
            size_t stride = strides_[static_cast<size_t>(p)];
            size_t coord = rest / stride;
            rest %= stride;
            size_t slot = coord / S;
            size_t sp = coord % S;
            mapped += (position[slot] * S + sp) * stride;
        }
        out[mapped] = amp_[idx];
    }
    return out;
}

int packet_half_width(double sigma) {
    return std::max(0, static_cast<int>(std::floor(3.0 * sigma)) - 1);
}

std::vector<std::pair<int, double>> packet_profile(int center, double sigma) {
    if (!(sigma > 0)) throw ValidationError("packet width must be positive");
    const int h = packet_half_width(sigma);
    std::vector<std::pair<int, double>> out;
    double n2 = 0.0;
    for (int d = -h; d <= h; ++d) {
        double v = std::exp(-static_cast<double>(d * d) / (4.0 * sigma * sigma));
        out.emplace_back(center + d, v);
        n2 += v * v;
    }
    for (auto &[j, v] : out) v /= std::sqrt(n2);
    return out;
}

CutState initial_state(std::shared_ptr<const Dynamics> dynamics, const InitialSpec &spec) {
    const int n = static_cast<int>(spec.particles.size());
    if (n < 1) throw ValidationError("at least one particle required");
    if (spec.entanglement == SpinEntanglement::Singlet && (n != 2 || !spec.spin)) {
        throw ValidationError("singlet requires two particles with spin");
    }
    CutState state(std::move(dynamics), n, spec.spin);
    const int L = state.L();
    const size_t S = static_cast<size_t>(state.spin_dim());
    const size_t dim = state.particle_dim();

    if (spec.well_localized) {
        struct Placed {
            int center;
            double sigma;
        };
        std::vector<Placed> all;
        for (const auto &pi : spec.particles) {
            for (const auto &t : pi.packets) {
                double margin = 3.0 * t.sigma;
                if (t.center - margin < 0 || t.center + margin > L - 1) {
                    throw ValidationError("packet at " + std::to_string(t.center) +
                                          " closer than 3 sigma to the lattice edge");
                }
                all.push_back({t.center, t.sigma});
            }
        }
        for (size_t a = 0; a < all.size(); ++a) {
            for (size_t b = a + 1; b < all.size(); ++b) {
                double need = 6.0 * std::max(all[a].sigma, all[b].sigma);
                if (std::abs(all[a].center - all[b].center) < need) {
                    throw ValidationError("packets at " + std::to_string(all[a].center) + " and " +
                                          std::to_string(all[b].center) + " closer than 6 sigma");
                }
            }
        }
    }

    // Position amplitudes per particle over slots of the initial cut.
    std::vector<std::vector<cplx>> position(static_cast<size_t>(n), std::vector<cplx>(static_cast<size_t>(2 * L)));
    for (int p = 0; p < n; ++p) {
        const auto &pi = spec.particles[static_cast<size_t>(p)];
        if (pi.packets.empty()) throw ValidationError("particle " + std::to_string(p) + " has no packets");
        auto &pos = position[static_cast<size_t>(p)];
        for (const auto &t : pi.packets) {
            for (auto [j, v] : packet_profile(t.center, t.sigma)) {
                if (j < 0 || j >= L) throw ValidationError("packet support outside lattice");
                size_t slot = static_cast<size_t>(2 * j + (t.chirality == Chirality::Right ? 0 : 1));
                pos[slot] += t.coefficient * v;
            }
        }
        double n2 = 0.0;
        for (auto &a : pos) n2 += std::norm(a);
        if (n2 < kNegligibleWeight) throw ValidationError("particle " + std::to_string(p) + " is not normalizable");
        for (auto &a : pos) a /= std::sqrt(n2);
    }

    // Spin tensor over S^n entries, particle 0 most significant.
    size_t spin_entries = ipow(S, n);
    std::vector<cplx> spin(spin_entries, cplx{1.0, 0.0});
    if (spec.spin) {
        if (spec.entanglement == SpinEntanglement::Singlet) {
            const double r = 1.0 / std::sqrt(2.0);
            spin = {0.0, r, -r, 0.0};
        } else {
            for (int p = 0; p < n; ++p) {
                const auto &chi = spec.particles[static_cast<size_t>(p)].spin;
                double n2 = std::norm(chi[0]) + std::norm(chi[1]);
                if (n2 < kNegligibleWeight) throw ValidationError("spin state is not normalizable");
                for (size_t e = 0; e < spin_entries; ++e) {
                    size_t sp = (e / ipow(S, n - 1 - p)) % S;
                    spin[e] *= chi[sp] / std::sqrt(n2);
                }
            }
        }
    }

    auto amp = state.amplitudes();
    for (size_t idx = 0; idx < amp.size(); ++idx) {
        size_t rest = idx;
        cplx v{1.0, 0.0};
        size_t spin_index = 0;
        for (int p = 0; p < n; ++p) {
            size_t stride = state.stride(p);
            size_t coord = rest / stride;
            rest %= stride;
            v *= position[static_cast<size_t>(p)][coord / S];
            spin_index = spin_index * S + coord % S;
        }
        amp[idx] = v * spin[spin_index];
    }
    (void)dim;
    for (const auto &ptr : spec.pointers) {
        if (ptr.ready_site < 0 || ptr.ready_site >= L || ptr.fired_site < 0 || ptr.fired_site >= L) {
            throw ValidationError("pointer display site outside lattice");
        }
    }
    state.pointers() = spec.pointers;
    return state;
}

namespace {

/// Per-coordinate multiplier of the operator on the target particle.
std::vector<double> coordinate_factors(const CutState &state, const CollapseOperator &op, int layer) {
    const size_t S = static_cast<size_t>(state.spin_dim());
    std::vector<double> fac(state.particle_dim(), 1.0);
    for (size_t coord = 0; coord < fac.size(); ++coord) {
        Link link = state.link(static_cast<int>(coord / S));
        if (layer >= 0 && link.t != layer) continue;
        fac[coord] = op.profile(link.j);
    }
    return fac;
}

void check_target(const CutState &state, const CollapseOperator &op) {
    if (op.particle < 0 || op.particle >= state.particles()) throw ValidationError("operator targets a missing particle");
    if (op.pointer >= static_cast<int>(state.pointers().size())) throw ValidationError("operator targets a missing pointer");
    if (op.pointer >= 0 && op.kind != OperatorKind::Projector) throw ValidationError("only projectors flip pointers");
    if (op.kind == OperatorKind::GaussianHit && !(op.sigma > 0)) throw ValidationError("hit width must be positive");
}

}  // namespace

double collapse_weight(const CutState &state, const CollapseOperator &op, int layer) {
    check_target(state, op);
    auto fac = coordinate_factors(state, op, layer);
    const size_t stride = state.stride(op.particle);
    const size_t dim = state.particle_dim();
    double w = 0.0;
    auto amp = state.amplitudes();
    for (size_t idx = 0; idx < amp.size(); ++idx) {
        double f = fac[(idx / stride) % dim];
        w += f * f * std::norm(amp[idx]);
    }
    return w;
}

double apply_collapse_in_place(CutState &state, const CollapseOperator &op, int layer) {
    check_target(state, op);
    auto fac = coordinate_factors(state, op, layer);
    const size_t stride = state.stride(op.particle);
    const size_t dim = state.particle_dim();
    auto amp = state.amplitudes();
    double w = 0.0;
    for (size_t idx = 0; idx < amp.size(); ++idx) {
        amp[idx] *= fac[(idx / stride) % dim];
        w += std::norm(amp[idx]);
    }
    if (w < kNegligibleWeight) {
        throw InconsistentRecord("collapse branch has negligible weight " + std::to_string(w));
    }
    double inv = 1.0 / std::sqrt(w);
    for (auto &a : amp) a *= inv;
    if (op.pointer >= 0) state.pointers()[static_cast<size_t>(op.pointer)].fired = true;
    return w;
}

std::pair<CutState, double> apply_collapse(const CutState &state, const CollapseOperator &op) {
    CutState out = state;
    double w = apply_collapse_in_place(out, op);
    return {std::move(out), w};
}

CutState advance_to_cut(const CutState &state, const Cut &target, std::span<const LocatedOperator> operators) {
    if (!cut_leq(state.cut(), target)) throw ValidationError("target cut is not above the current cut");
    std::vector<const LocatedOperator *> due;
    for (const auto &lo : operators) {
        state.dynamics().lattice.require(lo.location);
        if (event_below(state.cut(), lo.location)) {
            throw ValidationError("operator at " + to_string(lo.location) + " lies below the current cut");
        }
        if (event_below(target, lo.location)) due.push_back(&lo);
    }
    std::stable_sort(due.begin(), due.end(),
                     [](const LocatedOperator *a, const LocatedOperator *b) { return a->location < b->location; });

    CutState out = state;
    const int L = out.L();
    for (const auto *lo : due) {
        const int tau = lo->location.t;
        if (tau < out.last_collapse_layer()) {
            throw ValidationError("operator at " + to_string(lo->location) + " precedes an applied collapse");
        }
        // Pass through (tau, support) with both neighbours at or below tau so
        // every link emitted on that part of the row crosses the cut.
        Region supp = lo->op.support(L);
        std::vector<int> f(static_cast<size_t>(L));
        for (int j = 0; j < L; ++j) {
            int d = j < supp.lo ? supp.lo - j : (j > supp.hi ? j - supp.hi : 0);
            int lower = std::max(0, tau - d);
            int upper = tau + std::max(0, d - 1);
            f[static_cast<size_t>(j)] = std::clamp(out.cut()[j], lower, upper);
        }
        out.move_to(Cut(std::move(f)));
        apply_collapse_in_place(out, lo->op, tau);
        out.note_collapse(tau);
    }
    out.move_to(target);
    return out;
}

namespace {

std::vector<double> coordinate_marginal(const CutState &state, int p) {
    const size_t stride = state.stride(p);
    const size_t dim = state.particle_dim();
    std::vector<double> acc(dim, 0.0);
    auto amp = state.amplitudes();
    for (size_t idx = 0; idx < amp.size(); ++idx) acc[(idx / stride) % dim] += std::norm(amp[idx]);
    return acc;
}

double particle_mass(const MassAssignment &masses, int p) {
    return static_cast<size_t>(p) < masses.particle.size() ? masses.particle[static_cast<size_t>(p)] : 1.0;
}

double pointer_mass(const MassAssignment &masses, size_t k) {
    return k < masses.pointer.size() ? masses.pointer[k] : 1.0;
}

}  // namespace

std::vector<double> position_mass_marginal(const CutState &state, const MassAssignment &masses) {
    const size_t S = static_cast<size_t>(state.spin_dim());
    std::vector<double> out(static_cast<size_t>(state.L()), 0.0);
    for (int p = 0; p < state.particles(); ++p) {
        auto acc = coordinate_marginal(state, p);
        double m = particle_mass(masses, p);
        for (size_t coord = 0; coord < acc.size(); ++coord) {
            out[static_cast<size_t>(state.link(static_cast<int>(coord / S)).j)] += m * acc[coord];
        }
    }
    for (size_t k = 0; k < state.pointers().size(); ++k) {
        out[static_cast<size_t>(state.pointers()[k].display_site())] += pointer_mass(masses, k);
    }
    return out;
}

double event_mass(const CutState &state, const Event &x, const MassAssignment &masses) {
    const size_t S = static_cast<size_t>(state.spin_dim());
    int slots[2] = {state.slot_of({x.t, x.j, Chirality::Right}), state.slot_of({x.t, x.j, Chirality::Left})};
    double total = 0.0;
    for (int p = 0; p < state.particles(); ++p) {
        const size_t stride = state.stride(p);
        const size_t dim = state.particle_dim();
        double acc = 0.0;
        auto amp = state.amplitudes();
        const size_t block = dim * stride;
        for (int slot : slots) {
            if (slot < 0) continue;
            for (size_t outer = 0; outer < amp.size() / block; ++outer) {
                for (size_t sp = 0; sp < S; ++sp) {
                    const cplx *row = amp.data() + outer * block + (static_cast<size_t>(slot) * S + sp) * stride;
                    for (size_t inner = 0; inner < stride; ++inner) acc += std::norm(row[inner]);
                }
            }
        }
        total += particle_mass(masses, p) * acc;
    }
    return total;
}

double pointer_mass_at(const CutState &state, int j, const MassAssignment &masses) {
    double total = 0.0;
    for (size_t k = 0; k < state.pointers().size(); ++k) {
        if (state.pointers()[k].display_site() == j) total += pointer_mass(masses, k);
    }
    return total;
}

double region_probability(const CutState &state, int particle, const Region &region) {
    const size_t S = static_cast<size_t>(state.spin_dim());
    auto acc = coordinate_marginal(state, particle);
    double total = 0.0;
    for (size_t coord = 0; coord < acc.size(); ++coord) {
        if (region.contains(state.link(static_cast<int>(coord / S)).j)) total += acc[coord];
    }
    return total;
}

std::array<cplx, 4> reduced_spin_state(const CutState &state, int particle) {
    if (!state.spin()) throw ValidationError("spin is disabled");
    if (particle < 0 || particle >= state.particles()) throw ValidationError("no such particle");
    const size_t stride = state.stride(particle);
    const size_t dim = state.particle_dim();
    std::array<cplx, 4> rho{};
    auto amp = state.amplitudes();
    for (size_t idx = 0; idx < amp.size(); ++idx) {
        size_t coord = (idx / stride) % dim;
        if (coord % 2 != 0) continue;
        cplx up = amp[idx];
        cplx down = amp[idx + stride];
        rho[0] += up * std::conj(up);
        rho[1] += up * std::conj(down);
        rho[2] += down * std::conj(up);
        rho[3] += down * std::conj(down);
    }
    double tr = rho[0].real() + rho[3].real();
    if (tr < kNegligibleWeight) throw InconsistentRecord("null state has no reduced spin state");
    for (auto &r : rho) r /= tr;
    return rho;
}

}  // namespace lcm
