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

// Brute-force reference for the link-slot engine: explicit flat-layer
// matrices over (site, chirality, spin) and time-ordered products.

#ifndef LCM_TESTS_DENSE_ORACLE_HPP
#define LCM_TESTS_DENSE_ORACLE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "lcm/state.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// A collapse operator in oracle terms: a diagonal profile over sites.
struct Op {
    lcm::Event at;
    int kind = 0;  // 0 inside window, 1 outside window, 2 gaussian
    int particle = 0;
    int lo = 0, hi = 0;
    double center = 0.0, sigma = 1.0;
    int pointer = -1;

    double profile(int j) const {
        if (kind == 0) return (j >= lo && j <= hi) ? 1.0 : 0.0;
        if (kind == 1) return (j >= lo && j <= hi) ? 0.0 : 1.0;
        double d = j - center;
        return std::exp(-d * d / (4.0 * sigma * sigma));
    }

    static Op from(const lcm::Event &at, const lcm::CollapseOperator &op) {
        Op o;
        o.at = at;
        o.kind = op.kind == lcm::OperatorKind::Projector ? 0 : op.kind == lcm::OperatorKind::ComplementProjector ? 1 : 2;
        o.particle = op.particle;
        o.lo = op.region.lo;
        o.hi = op.region.hi;
        o.center = op.center;
        o.sigma = op.sigma;
        o.pointer = op.pointer;
        return o;
    }
};

class Model {
   public:
    Model(const lcm::Dynamics &dyn, int particles, bool spin)
        : dyn_(dyn), L_(dyn.lattice.L), S_(spin ? 2 : 1), N_(particles) {}

    int d() const { return 2 * L_ * S_; }
    int total() const { return N_ == 1 ? d() : d() * d(); }
    int index(int j, int c, int s) const { return (2 * j + c) * S_ + s; }

    /// Flat layer t-1 to t for one particle.
    Mat layer(int p, int t) const {
        const double th = dyn_.coin_angle(t);
        const cplx c{std::cos(th), 0.0};
        const cplx off{0.0, -std::sin(th)};
        Mat U = Mat::Zero(d(), d());
        for (int j = 0; j < L_; ++j) {
            // Incoming movers: from the left (a) and from the right (b).
            int a_site = j > 0 ? j - 1 : 0, a_dir = j > 0 ? 0 : 1;
            int b_site = j < L_ - 1 ? j + 1 : L_ - 1, b_dir = j < L_ - 1 ? 1 : 0;
            const int n = 2 * S_;
            Mat M = Mat::Zero(n, n);  // rows: out (R s..., L s...), cols: in (a s..., b s...)
            for (int s = 0; s < S_; ++s) {
                M(s, s) = c;
                M(s, S_ + s) = off;
                M(S_ + s, s) = off;
                M(S_ + s, S_ + s) = c;
            }
            for (const auto &g : dyn_.magnets) {
                if (g.particle != p || g.layer != t || j < g.window.lo || j > g.window.hi) continue;
                const double gc = std::cos(g.angle / 2.0), gs = std::sin(g.angle / 2.0);
                Mat R = Mat::Zero(n, n);
                for (int o = 0; o < 2; ++o) {
                    R(o * 2 + 0, o * 2 + 0) = gc;
                    R(o * 2 + 0, o * 2 + 1) = gs;
                    R(o * 2 + 1, o * 2 + 0) = -gs;
                    R(o * 2 + 1, o * 2 + 1) = gc;
                }
                Mat P = Mat::Identity(n, n);
                P(1, 1) = 0.0;
                P(3, 3) = 0.0;
                P(1, 3) = 1.0;
                P(3, 1) = 1.0;
                M = P * R * M;
            }
            for (int so = 0; so < n; ++so) {
                int out = index(j, so / S_, so % S_);
                for (int si = 0; si < n; ++si) {
                    int in = si < S_ ? index(a_site, a_dir, si) : index(b_site, b_dir, si - S_);
                    U(out, in) += M(so, si);
                }
            }
        }
        return U;
    }

    Mat full_layer(int t) const {
        Mat U0 = layer(0, t);
        if (N_ == 1) return U0;
        return kron(U0, layer(1, t));
    }

    static Mat kron(const Mat &A, const Mat &B) {
        Mat K(A.rows() * B.rows(), A.cols() * B.cols());
        for (int i = 0; i < A.rows(); ++i)
            for (int k = 0; k < A.cols(); ++k) K.block(i * B.rows(), k * B.cols(), B.rows(), B.cols()) = A(i, k) * B;
        return K;
    }

    /// Multiplies by the operator's profile on its particle.
    Vec apply(const Vec &psi, const Op &op) const {
        Vec out = psi;
        for (int idx = 0; idx < total(); ++idx) {
            int coord = N_ == 1 ? idx : (op.particle == 0 ? idx / d() : idx % d());
            out(idx) *= op.profile(coord / (2 * S_));
        }
        return out;
    }

    /// Flat state at t_top with ops applied on their layers, renormalized
    /// after each. Ops must be sorted by layer.
    Vec time_ordered(const Vec &psi0, const std::vector<Op> &ops, int t_top, bool normalize = true) const {
        Vec psi = psi0;
        size_t k = 0;
        for (int t = 0; t <= t_top; ++t) {
            if (t > 0) psi = full_layer(t) * psi;
            for (; k < ops.size() && ops[k].at.t == t; ++k) {
                psi = apply(psi, ops[k]);
                if (normalize) psi /= psi.norm();
            }
        }
        return psi;
    }

    /// Maps the flat state at t_top down to link amplitudes of `links`
    /// (canonical order), one copy of the link list per particle.
    std::vector<cplx> on_links(const Vec &psi_top, int t_top, const std::vector<lcm::Link> &links) const {
        std::vector<std::vector<Mat>> per(static_cast<size_t>(N_));
        for (int p = 0; p < N_; ++p) {
            auto &v = per[static_cast<size_t>(p)];
            v.resize(static_cast<size_t>(t_top + 1));
            v[static_cast<size_t>(t_top)] = Mat::Identity(d(), d());
            for (int t = t_top - 1; t >= 0; --t) {
                v[static_cast<size_t>(t)] = layer(p, t + 1).adjoint() * v[static_cast<size_t>(t + 1)];
            }
        }
        const int rows = static_cast<int>(links.size()) * S_;
        std::vector<Mat> W(static_cast<size_t>(N_), Mat(rows, d()));
        for (int p = 0; p < N_; ++p) {
            for (size_t q = 0; q < links.size(); ++q) {
                const auto &lk = links[q];
                for (int s = 0; s < S_; ++s) {
                    int c = lk.dir == lcm::Chirality::Right ? 0 : 1;
                    W[static_cast<size_t>(p)].row(static_cast<int>(q) * S_ + s) =
                        per[static_cast<size_t>(p)][static_cast<size_t>(lk.t)].row(index(lk.j, c, s));
                }
            }
        }
        std::vector<cplx> out;
        if (N_ == 1) {
            Vec r = W[0] * psi_top;
            out.assign(r.data(), r.data() + r.size());
            return out;
        }
        Mat Psi(d(), d());
        for (int a = 0; a < d(); ++a)
            for (int b = 0; b < d(); ++b) Psi(a, b) = psi_top(a * d() + b);
        Mat R = W[0] * Psi * W[1].transpose();
        for (int a = 0; a < R.rows(); ++a)
            for (int b = 0; b < R.cols(); ++b) out.push_back(R(a, b));
        return out;
    }

    /// Mass on the two links emitted at (x.t, x.j), psi flat at x.t.
    double apex_mass(const Vec &psi, int j, const std::vector<double> &masses) const {
        double total_mass = 0.0;
        for (int idx = 0; idx < total(); ++idx) {
            double w = std::norm(psi(idx));
            for (int p = 0; p < N_; ++p) {
                int coord = N_ == 1 ? idx : (p == 0 ? idx / d() : idx % d());
                if (coord / (2 * S_) == j) total_mass += masses[static_cast<size_t>(p)] * w;
            }
        }
        return total_mass;
    }

   private:
    lcm::Dynamics dyn_;
    int L_, S_, N_;
};

inline Vec from_state(const lcm::CutState &s) {
    auto a = s.canonical_amplitudes();
    Vec v(static_cast<int>(a.size()));
    for (size_t k = 0; k < a.size(); ++k) v(static_cast<int>(k)) = a[k];
    return v;
}

}  // namespace oracle

#endif
