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

#include "lcm/matter.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace lcm {

double MatterField::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

double m_rel(const Event &x, const CutState &psi0, const EventRecord &record, const MassAssignment &masses) {
    const Lattice &lat = psi0.dynamics().lattice;
    lat.require(x);
    std::vector<LocatedOperator> past;
    for (const auto &e : record.events) {
        if (causal_past(x, e.location)) past.push_back({e.location, e.op});
    }
    CutState cone = advance_to_cut(psi0, plc(x, lat.L), past);
    cone.normalize();
    return event_mass(cone, x, masses) + pointer_mass_at(cone, x.j, masses);
}

double m_flat(const Event &x, const Cut &cut, const CutState &psi0, const EventRecord &record,
              const MassAssignment &masses) {
    psi0.dynamics().lattice.require(x);
    if (cut.width() != psi0.L() || cut[x.j] != x.t) throw ValidationError(to_string(x) + " does not lie on the cut");
    auto ops = record.operators();
    CutState state = advance_to_cut(psi0, cut, ops);
    state.normalize();
    return position_mass_marginal(state, masses)[static_cast<size_t>(x.j)];
}

MatterEvaluator::MatterEvaluator(CutState psi0, EventRecord record, MassAssignment masses)
    : psi0_(std::move(psi0)), record_(std::move(record)), masses_(std::move(masses)) {
    if (psi0_.cut() != flat_cut(0, psi0_.L())) throw ValidationError("initial state must sit on the initial cut");
    for (const auto &e : record_.events) {
        psi0_.dynamics().lattice.require(e.location);
        event_layers_.push_back(e.location.t);
    }
    std::sort(event_layers_.begin(), event_layers_.end());
    event_layers_.erase(std::unique(event_layers_.begin(), event_layers_.end()), event_layers_.end());
}

std::shared_ptr<const CutState> MatterEvaluator::find_checkpoint(const Key &group, int limit, int &layer) const {
    std::lock_guard lock(mutex_);
    for (auto it = event_layers_.rbegin(); it != event_layers_.rend(); ++it) {
        if (*it > limit) continue;
        Key applied;
        for (int k : group) {
            if (record_.events[static_cast<size_t>(k)].location.t < *it) applied.push_back(k);
        }
        auto found = checkpoints_.find({applied, *it});
        if (found != checkpoints_.end()) {
            layer = *it;
            return found->second;
        }
    }
    layer = 0;
    return nullptr;
}

void MatterEvaluator::run_group(const Key &group, std::span<const size_t> members, std::span<const Event> points,
                                std::span<double> out) const {
    int lo = points[members.front()].t;
    int hi = lo;
    for (size_t m : members) {
        lo = std::min(lo, points[m].t);
        hi = std::max(hi, points[m].t);
    }
    std::vector<std::vector<size_t>> by_layer(static_cast<size_t>(hi + 1));
    for (size_t m : members) by_layer[static_cast<size_t>(points[m].t)].push_back(m);

    int t = 0;
    auto start = find_checkpoint(group, lo, t);
    CutState state = start ? *start : psi0_;
    Key applied;
    for (int k : group) {
        if (record_.events[static_cast<size_t>(k)].location.t < t) applied.push_back(k);
    }
    for (;; ++t) {
        if (std::binary_search(event_layers_.begin(), event_layers_.end(), t)) {
            std::lock_guard lock(mutex_);
            auto key = std::pair(applied, t);
            if (!checkpoints_.contains(key)) checkpoints_.emplace(key, std::make_shared<const CutState>(state));
        }
        for (size_t m : by_layer[static_cast<size_t>(t)]) {
            out[m] = event_mass(state, points[m], masses_) + pointer_mass_at(state, points[m].j, masses_);
        }
        for (int k : group) {
            const auto &e = record_.events[static_cast<size_t>(k)];
            if (e.location.t != t) continue;
            apply_collapse_in_place(state, e.op, t);
            state.note_collapse(t);
            applied.push_back(k);
        }
        if (t == hi) break;
        state.move_to(flat_cut(t + 1, state.L()));
    }
}

std::vector<double> MatterEvaluator::m_rel_many(std::span<const Event> points, int workers) const {
    std::vector<double> out(points.size(), 0.0);
    if (points.empty()) return out;
    std::map<Key, std::vector<size_t>> groups;
    for (size_t i = 0; i < points.size(); ++i) {
        psi0_.dynamics().lattice.require(points[i]);
        Key key;
        for (size_t k = 0; k < record_.events.size(); ++k) {
            if (causal_past(points[i], record_.events[k].location)) key.push_back(static_cast<int>(k));
        }
        groups[key].push_back(i);
    }
    std::vector<const std::pair<const Key, std::vector<size_t>> *> jobs;
    for (const auto &g : groups) jobs.push_back(&g);
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < jobs.size(); i = next++) run_group(jobs[i]->first, jobs[i]->second, points, out);
    };
    const int n = std::clamp(workers, 1, static_cast<int>(jobs.size()));
    if (n == 1) {
        work();
        return out;
    }
    std::vector<std::jthread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(work);
    pool.clear();
    return out;
}

MatterField m_grid(const FieldRegion &region, const CutState &psi0, const EventRecord &record,
                   const MassAssignment &masses, int stride, int workers) {
    const Lattice &lat = psi0.dynamics().lattice;
    if (stride < 1) throw ValidationError("stride must be >= 1");
    if (region.t_lo > region.t_hi || region.j_lo > region.j_hi) throw ValidationError("empty field region");
    lat.require({region.t_lo, region.j_lo});
    lat.require({region.t_hi, region.j_hi});
    MatterField field;
    field.region = region;
    field.stride = stride;
    field.law = Law::Rel;
    for (int t = region.t_lo; t <= region.t_hi; t += stride) field.layers.push_back(t);
    for (int j = region.j_lo; j <= region.j_hi; j += stride) field.sites.push_back(j);
    std::vector<Event> points;
    points.reserve(field.layers.size() * field.sites.size());
    for (int t : field.layers) {
        for (int j : field.sites) points.push_back({t, j});
    }
    MatterEvaluator eval(psi0, record, masses);
    field.values = eval.m_rel_many(points, workers);
    return field;
}

std::vector<ComparisonRow> compare_on_cut(const Cut &cut, const CutState &psi0, const EventRecord &record,
                                          const MassAssignment &masses, std::span<const NamedRegion> regions,
                                          int workers) {
    if (cut.width() != psi0.L()) throw ValidationError("cut width differs from lattice width");
    auto ops = record.operators();
    CutState on_cut = advance_to_cut(psi0, cut, ops);
    on_cut.normalize();
    auto flat = position_mass_marginal(on_cut, masses);

    std::vector<Event> points;
    for (const auto &r : regions) {
        if (r.region.lo < 0 || r.region.hi >= cut.width() || r.region.lo > r.region.hi) {
            throw ValidationError("region '" + r.name + "' does not lie on the cut");
        }
        for (int j = r.region.lo; j <= r.region.hi; ++j) points.push_back({cut[j], j});
    }
    MatterEvaluator eval(psi0, record, masses);
    auto rel = eval.m_rel_many(points, workers);

    std::vector<ComparisonRow> rows;
    size_t k = 0;
    for (const auto &r : regions) {
        ComparisonRow row{r.name, r.region, 0.0, 0.0};
        for (int j = r.region.lo; j <= r.region.hi; ++j) {
            row.rel += rel[k++];
            row.flat += flat[static_cast<size_t>(j)];
        }
        rows.push_back(row);
    }
    return rows;
}

int default_workers() {
    if (const char *env = std::getenv("LCMATTER_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lcm
