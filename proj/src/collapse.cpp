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

#include "lcm/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lcm {

namespace {

constexpr double kNegligibleWeight = 1e-15;

/// Detector indices in sampling order: trigger layer, then site.
std::vector<int> sampling_order(std::span<const DetectorSpec> detectors) {
    std::vector<int> order(detectors.size());
    for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto &da = detectors[static_cast<size_t>(a)];
        const auto &db = detectors[static_cast<size_t>(b)];
        return std::pair(da.trigger, da.site) < std::pair(db.trigger, db.site);
    });
    return order;
}

CollapseOperator detector_operator(const DetectorSpec &d, int index, int outcome) {
    return outcome == kFired ? CollapseOperator::projector(d.particle, d.window, index)
                             : CollapseOperator::complement(d.particle, d.window);
}

void sort_record(EventRecord &record) {
    std::stable_sort(record.events.begin(), record.events.end(),
                     [](const RealizedEvent &a, const RealizedEvent &b) { return a.location < b.location; });
}

/// Site marginal of one particle on a flat cut.
std::vector<double> site_marginal(const CutState &state, int particle) {
    std::vector<double> out(static_cast<size_t>(state.L()), 0.0);
    for (int j = 0; j < state.L(); ++j) out[static_cast<size_t>(j)] = region_probability(state, particle, {j, j});
    return out;
}

/// Normalized density of hit centers z in [lo, hi].
std::vector<double> hit_density(const CutState &state, int particle, double sigma, std::pair<int, int> range) {
    auto marginal = site_marginal(state, particle);
    std::vector<double> p(static_cast<size_t>(range.second - range.first + 1), 0.0);
    double total = 0.0;
    for (int z = range.first; z <= range.second; ++z) {
        double acc = 0.0;
        for (size_t j = 0; j < marginal.size(); ++j) {
            double d = static_cast<double>(j) - z;
            acc += marginal[j] * std::exp(-d * d / (2.0 * sigma * sigma));
        }
        p[static_cast<size_t>(z - range.first)] = acc;
        total += acc;
    }
    for (auto &v : p) v /= total;
    return p;
}

int sample_index(std::span<const double> p, double u) {
    double acc = 0.0;
    int last = -1;
    for (size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue;
        acc += p[k];
        last = static_cast<int>(k);
        if (u < acc) return last;
    }
    return last;
}

std::pair<int, int> center_range(int L, double sigma) {
    int pad = static_cast<int>(std::ceil(10.0 * sigma));
    return {-pad, L - 1 + pad};
}

}  // namespace

double uniform01(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<LocatedOperator> EventRecord::operators() const {
    std::vector<LocatedOperator> out;
    out.reserve(events.size());
    for (const auto &e : events) out.push_back({e.location, e.op});
    return out;
}

std::optional<int> EventRecord::detector_outcome(int detector) const {
    for (const auto &e : events) {
        if (e.detector == detector) return e.outcome;
    }
    return std::nullopt;
}

std::vector<Pointer> pointers_for(std::span<const DetectorSpec> detectors) {
    std::vector<Pointer> out;
    for (const auto &d : detectors) out.push_back({d.ready_site, d.fired_site, false});
    return out;
}

void validate_detectors(std::span<const DetectorSpec> detectors, const Lattice &lattice, int particles) {
    std::set<std::string> ids;
    std::set<std::pair<int, int>> locations;
    for (const auto &d : detectors) {
        const std::string who = "detector '" + d.id + "'";
        if (d.id.empty()) throw ValidationError("detector id must not be empty");
        if (!ids.insert(d.id).second) throw ValidationError("duplicate detector id '" + d.id + "'");
        if (d.particle < 0 || d.particle >= particles) throw ValidationError(who + " targets a missing particle");
        if (d.site < 0 || d.site >= lattice.L) throw ValidationError(who + " site outside lattice");
        if (d.window.lo < 0 || d.window.hi >= lattice.L || d.window.lo > d.window.hi) {
            throw ValidationError(who + " window outside lattice");
        }
        if (d.trigger < 1 || d.trigger > lattice.T) throw ValidationError(who + " trigger outside [1, T]");
        for (int s : {d.ready_site, d.fired_site}) {
            if (s < 0 || s >= lattice.L) throw ValidationError(who + " pointer site outside lattice");
        }
        if (!(d.mass > 0)) throw ValidationError(who + " pointer mass must be positive");
        if (!locations.insert({d.trigger, d.site}).second) {
            throw ValidationError(who + " collides with another detector at " + to_string({d.trigger, d.site}));
        }
    }
}

RecordSampler::RecordSampler(CutState initial, std::vector<DetectorSpec> detectors, GrwParams grw)
    : initial_(std::move(initial)), detectors_(std::move(detectors)), grw_(grw) {
    const Lattice &lat = initial_.dynamics().lattice;
    validate_detectors(detectors_, lat, initial_.particles());
    if (initial_.pointers().size() != detectors_.size()) throw ValidationError("one pointer per detector required");
    if (!(grw_.lambda >= 0 && grw_.lambda <= 1)) throw ValidationError("hit probability must lie in [0, 1]");
    if (!(grw_.sigma >= 1)) throw ValidationError("hit width must be >= 1");
    for (const auto &d : detectors_) last_layer_ = std::max(last_layer_, d.trigger);
    if (grw_.lambda > 0) {
        if (grw_.first_layer < 1 || grw_.last_layer > lat.T || grw_.first_layer > grw_.last_layer) {
            throw ValidationError("hit window must lie in [1, T]");
        }
        last_layer_ = std::max(last_layer_, grw_.last_layer);
    }
}

std::pair<int, int> RecordSampler::hit_center_range() const {
    return center_range(initial_.L(), grw_.sigma);
}

EventRecord RecordSampler::sample(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    EventRecord record;
    const auto order = sampling_order(detectors_);

    if (grw_.lambda == 0) {
        // Walk the branch tree; node states are flat cuts just before the
        // next detector's collapse.
        std::vector<int> prefix;
        for (int k : order) {
            const auto &d = detectors_[static_cast<size_t>(k)];
            Node node;
            {
                std::lock_guard lock(mutex_);
                auto it = cache_.find(prefix);
                if (it != cache_.end()) node = it->second;
            }
            if (!node.pre) {
                CutState s = initial_;
                if (!prefix.empty()) {
                    std::vector<int> parent(prefix.begin(), prefix.end() - 1);
                    {
                        std::lock_guard lock(mutex_);
                        s = *cache_.at(parent).pre;
                    }
                    int prev = order[prefix.size() - 1];
                    const int layer = s.cut()[0];
                    apply_collapse_in_place(s, detector_operator(detectors_[static_cast<size_t>(prev)], prev, prefix.back()),
                                            layer);
                    s.note_collapse(layer);
                }
                s.move_to(flat_cut(d.trigger, s.L()));
                node.w_fire = collapse_weight(s, detector_operator(d, k, kFired), d.trigger);
                node.w_miss = collapse_weight(s, detector_operator(d, k, kNotFired), d.trigger);
                node.pre = std::make_shared<const CutState>(std::move(s));
                std::lock_guard lock(mutex_);
                cache_.emplace(prefix, node);
            }
            const double w_fire = node.w_fire;
            const double w_miss = node.w_miss;
            int outcome = uniform01(rng) * (w_fire + w_miss) < w_fire ? kFired : kNotFired;
            double w = outcome == kFired ? w_fire : w_miss;
            if (w < kNegligibleWeight) throw InconsistentRecord("sampled a negligible detector branch");
            record.events.push_back({{d.trigger, d.site}, detector_operator(d, k, outcome), k, outcome, w});
            prefix.push_back(outcome);
        }
        sort_record(record);
        return record;
    }

    const auto range = hit_center_range();
    CutState state = initial_;
    size_t next = 0;
    for (int t = 1; t <= last_layer_; ++t) {
        state.move_to(flat_cut(t, state.L()));
        for (; next < order.size() && detectors_[static_cast<size_t>(order[next])].trigger == t; ++next) {
            int k = order[next];
            const auto &d = detectors_[static_cast<size_t>(k)];
            double w_fire = collapse_weight(state, detector_operator(d, k, kFired), t);
            double w_miss = collapse_weight(state, detector_operator(d, k, kNotFired), t);
            int outcome = uniform01(rng) * (w_fire + w_miss) < w_fire ? kFired : kNotFired;
            auto op = detector_operator(d, k, outcome);
            double w = apply_collapse_in_place(state, op, t);
            state.note_collapse(t);
            record.events.push_back({{t, d.site}, op, k, outcome, w});
        }
        if (t < grw_.first_layer || t > grw_.last_layer) continue;
        for (int p = 0; p < state.particles(); ++p) {
            if (uniform01(rng) >= grw_.lambda) continue;
            auto density = hit_density(state, p, grw_.sigma, range);
            int idx = sample_index(density, uniform01(rng));
            int z = range.first + idx;
            auto op = CollapseOperator::gaussian(p, z, grw_.sigma);
            apply_collapse_in_place(state, op, t);
            state.note_collapse(t);
            Event where{t, std::clamp(z, 0, state.L() - 1)};
            record.events.push_back({where, op, -1, z, density[static_cast<size_t>(idx)]});
        }
    }
    sort_record(record);
    return record;
}

EventRecord sample_record(const CutState &initial, std::span<const DetectorSpec> detectors, const GrwParams &grw,
                          std::uint64_t seed) {
    RecordSampler sampler(initial, {detectors.begin(), detectors.end()}, grw);
    return sampler.sample(seed);
}

std::vector<BranchOutcome> enumerate_outcomes(const CutState &initial, std::span<const DetectorSpec> detectors) {
    validate_detectors(detectors, initial.dynamics().lattice, initial.particles());
    const auto order = sampling_order(detectors);
    std::vector<BranchOutcome> leaves;
    struct Frame {
        CutState state;
        BranchOutcome branch;
        size_t depth;
    };
    BranchOutcome root;
    root.outcomes.assign(detectors.size(), -1);
    root.probability = 1.0;
    std::vector<Frame> stack;
    stack.push_back({initial, root, 0});
    while (!stack.empty()) {
        Frame fr = std::move(stack.back());
        stack.pop_back();
        if (fr.depth == order.size()) {
            sort_record(fr.branch.record);
            leaves.push_back(std::move(fr.branch));
            continue;
        }
        int k = order[fr.depth];
        const auto &d = detectors[static_cast<size_t>(k)];
        fr.state.move_to(flat_cut(d.trigger, fr.state.L()));
        for (int outcome : {kNotFired, kFired}) {
            auto op = detector_operator(d, k, outcome);
            double w = collapse_weight(fr.state, op, d.trigger);
            if (fr.branch.probability * w < kNegligibleWeight) continue;
            Frame child{fr.state, fr.branch, fr.depth + 1};
            apply_collapse_in_place(child.state, op, d.trigger);
            child.state.note_collapse(d.trigger);
            child.branch.probability *= w;
            child.branch.outcomes[static_cast<size_t>(k)] = outcome;
            child.branch.record.events.push_back({{d.trigger, d.site}, op, k, outcome, w});
            stack.push_back(std::move(child));
        }
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const BranchOutcome &a, const BranchOutcome &b) { return a.outcomes < b.outcomes; });
    return leaves;
}

namespace {

struct Outcome {
    CollapseOperator op;
    double weight;
};

/// Outcome operators and weights of a measurement on a state sitting on its
/// flat layer.
std::vector<Outcome> measurement_outcomes(const CutState &state, const Measurement &m) {
    std::vector<Outcome> out;
    if (m.kind == Measurement::Kind::Detection) {
        for (auto op : {CollapseOperator::complement(m.particle, m.window),
                        CollapseOperator::projector(m.particle, m.window)}) {
            out.push_back({op, collapse_weight(state, op, m.location.t)});
        }
        return out;
    }
    auto range = center_range(state.L(), m.sigma);
    auto density = hit_density(state, m.particle, m.sigma, range);
    for (int z = range.first; z <= range.second; ++z) {
        out.push_back({CollapseOperator::gaussian(m.particle, z, m.sigma), density[static_cast<size_t>(z - range.first)]});
    }
    return out;
}

std::vector<std::vector<double>> joint_distribution(const CutState &initial, const Measurement &first,
                                                    const Measurement &second, bool swap_axes) {
    CutState s = initial;
    s.move_to(flat_cut(first.location.t, s.L()));
    auto a = measurement_outcomes(s, first);
    std::vector<std::vector<double>> joint;
    for (const auto &oa : a) {
        std::vector<double> row;
        if (oa.weight < kNegligibleWeight) {
            CutState probe = s;
            probe.move_to(flat_cut(second.location.t, s.L()));
            row.assign(measurement_outcomes(probe, second).size(), 0.0);
        } else {
            CutState branch = s;
            apply_collapse_in_place(branch, oa.op, first.location.t);
            branch.move_to(flat_cut(second.location.t, branch.L()));
            for (const auto &ob : measurement_outcomes(branch, second)) row.push_back(oa.weight * ob.weight);
        }
        joint.push_back(std::move(row));
    }
    if (!swap_axes) return joint;
    std::vector<std::vector<double>> t(joint.empty() ? 0 : joint[0].size(), std::vector<double>(joint.size()));
    for (size_t i = 0; i < joint.size(); ++i) {
        for (size_t k = 0; k < joint[i].size(); ++k) t[k][i] = joint[i][k];
    }
    return t;
}

}  // namespace

double order_swap_check(const CutState &initial, const Measurement &a, const Measurement &b) {
    const Lattice &lat = initial.dynamics().lattice;
    lat.require(a.location);
    lat.require(b.location);
    if (!spacelike(a.location, b.location)) throw ValidationError("measurements are not spacelike separated");
    if (a.particle == b.particle && a.kind == Measurement::Kind::Detection && b.kind == Measurement::Kind::Detection) {
        int dt = std::abs(a.location.t - b.location.t);
        int gap = std::max(a.window.lo - b.window.hi, b.window.lo - a.window.hi);
        if (gap <= dt) throw ValidationError("detection windows on one particle are not spacelike separated");
    }
    for (const auto *m : {&a, &b}) {
        if (m->particle < 0 || m->particle >= initial.particles()) throw ValidationError("measurement targets a missing particle");
        if (m->kind == Measurement::Kind::Hit && !(m->sigma > 0)) throw ValidationError("hit width must be positive");
    }
    auto ab = joint_distribution(initial, a, b, false);
    auto ba = joint_distribution(initial, b, a, true);
    double worst = 0.0;
    for (size_t i = 0; i < ab.size(); ++i) {
        for (size_t k = 0; k < ab[i].size(); ++k) worst = std::max(worst, std::abs(ab[i][k] - ba[i][k]));
    }
    return worst;
}

std::optional<int> outcome_on_cut(const EventRecord &record, std::span<const DetectorSpec> detectors, const Cut &cut,
                                  const std::string &detector_id) {
    auto it = std::find_if(detectors.begin(), detectors.end(), [&](const DetectorSpec &d) { return d.id == detector_id; });
    if (it == detectors.end()) throw ValidationError("unknown measurement '" + detector_id + "'");
    const int k = static_cast<int>(it - detectors.begin());
    for (const auto &e : record.events) {
        if (e.detector == k) {
            if (event_below(cut, e.location)) return e.outcome;
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace lcm
