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

#include "lcm/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <thread>

namespace lcm {

namespace {

constexpr double kPark = std::numbers::pi / 2.0;

Cut ramp_cut(int L, int from, int to, int start) {
    std::vector<int> f(static_cast<size_t>(L));
    const int lo = std::min(from, to);
    const int hi = std::max(from, to);
    const int step = to >= from ? 1 : -1;
    for (int j = 0; j < L; ++j) f[static_cast<size_t>(j)] = std::clamp(from + step * (j - start), lo, hi);
    return Cut(std::move(f));
}

template <class F>
void parallel_for(int n, int workers, F &&body) {
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < n; i = next++) body(i);
    };
    const int w = std::clamp(workers, 1, std::max(1, n));
    if (w == 1) {
        work();
        return;
    }
    std::vector<std::jthread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
}

std::string outcome_label(const std::vector<DetectorSpec> &detectors, const std::vector<int> &outcomes) {
    std::string s;
    for (size_t k = 0; k < detectors.size(); ++k) {
        if (k) s += ",";
        s += detectors[k].id + ":" + (outcomes[k] == kFired ? "fired" : outcomes[k] == kNotFired ? "not" : "none");
    }
    return s;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::SingleDetector:
            return "single_detector";
        case ScenarioKind::TwoDetectors:
            return "two_detectors";
        case ScenarioKind::Epr:
            return "epr";
        case ScenarioKind::Custom:
            return "custom";
    }
    return "custom";
}

ScenarioKind scenario_kind_from_string(const std::string &name) {
    for (auto k : {ScenarioKind::SingleDetector, ScenarioKind::TwoDetectors, ScenarioKind::Epr, ScenarioKind::Custom}) {
        if (to_string(k) == name) return k;
    }
    throw ValidationError("unknown scenario kind '" + name + "'");
}

std::shared_ptr<const Dynamics> ScenarioConfig::dynamics() const {
    auto d = std::make_shared<Dynamics>();
    d->lattice = lattice;
    d->theta = theta;
    d->coin_windows = coin_windows;
    d->magnets = magnets;
    return d;
}

CutState ScenarioConfig::initial() const {
    InitialSpec spec;
    spec.spin = spin;
    spec.particles = particles;
    spec.entanglement = entanglement;
    spec.pointers = pointers_for(detectors);
    spec.well_localized = well_localized;
    return initial_state(dynamics(), spec);
}

MassAssignment ScenarioConfig::masses() const {
    MassAssignment m;
    m.particle = particle_masses;
    m.particle.resize(particles.size(), 1.0);
    for (const auto &d : detectors) m.pointer.push_back(d.mass);
    return m;
}

const NamedRegion &ScenarioConfig::region(const std::string &n) const {
    for (const auto &r : regions) {
        if (r.name == n) return r;
    }
    throw ValidationError("unknown region '" + n + "'");
}

const Cut &ScenarioConfig::cut(const std::string &n) const {
    for (const auto &c : cuts) {
        if (c.name == n) return c.cut;
    }
    throw ValidationError("unknown cut '" + n + "'");
}

int ScenarioConfig::detector_index(const std::string &id) const {
    for (size_t k = 0; k < detectors.size(); ++k) {
        if (detectors[k].id == id) return static_cast<int>(k);
    }
    throw ValidationError("unknown detector '" + id + "'");
}

void ScenarioConfig::validate() const {
    if (lattice.L < 2 || lattice.T < 1) throw ValidationError("lattice must have L >= 2 and T >= 1");
    dynamics()->validate();
    const int n = static_cast<int>(particles.size());
    if (n < 1 || n > 2) throw ValidationError("scenarios support one or two particles");
    if (!particle_masses.empty() && static_cast<int>(particle_masses.size()) != n) {
        throw ValidationError("one mass per particle required");
    }
    masses().validate(n, static_cast<int>(detectors.size()));
    for (const auto &m : magnets) {
        if (m.particle < 0 || m.particle >= n) throw ValidationError("magnet '" + m.id + "' targets a missing particle");
    }
    validate_detectors(detectors, lattice, n);
    if (!(grw.lambda >= 0 && grw.lambda <= 1)) throw ValidationError("grw.lambda must lie in [0, 1]");
    if (!(grw.sigma >= 1)) throw ValidationError("grw.sigma must be >= 1");
    if (grw.lambda > 0 && (grw.first_layer < 1 || grw.last_layer > lattice.T || grw.first_layer > grw.last_layer)) {
        throw ValidationError("grw layer window must lie in [1, T]");
    }
    if (runs < 1) throw ValidationError("runs must be >= 1");
    std::set<std::string> names;
    for (const auto &r : regions) {
        if (!names.insert(r.name).second) throw ValidationError("duplicate region '" + r.name + "'");
        if (r.region.lo < 0 || r.region.hi >= lattice.L || r.region.lo > r.region.hi) {
            throw ValidationError("region '" + r.name + "' outside lattice");
        }
    }
    names.clear();
    for (const auto &c : cuts) {
        if (!names.insert(c.name).second) throw ValidationError("duplicate cut '" + c.name + "'");
        if (c.cut.width() != lattice.L || c.cut.max_height() > lattice.T) {
            throw ValidationError("cut '" + c.name + "' does not fit the lattice");
        }
    }
    switch (kind) {
        case ScenarioKind::SingleDetector:
            if (n != 1 || detectors.size() != 1) throw ValidationError("single_detector needs one particle and one detector");
            break;
        case ScenarioKind::TwoDetectors:
            if (n != 1 || detectors.size() != 2) throw ValidationError("two_detectors needs one particle and two detectors");
            if (detectors[1].trigger < detectors[0].trigger + 1) {
                throw ValidationError("second detector must trigger at least one layer after the first");
            }
            break;
        case ScenarioKind::Epr:
            if (n != 2 || !spin || entanglement != SpinEntanglement::Singlet) {
                throw ValidationError("epr needs two particles in the spin singlet");
            }
            for (const auto &a : detectors) {
                for (const auto &b : detectors) {
                    if (a.particle != 0 || b.particle != 1) continue;
                    if (!spacelike({a.trigger, a.site}, {b.trigger, b.site})) {
                        throw ValidationError("detectors '" + a.id + "' and '" + b.id + "' are not spacelike separated");
                    }
                }
            }
            for (const char *id : {"A-up", "B-up"}) detector_index(id);
            break;
        case ScenarioKind::Custom:
            break;
    }
    (void)initial();
}

ScenarioConfig single_detector_config() {
    ScenarioConfig c;
    c.name = "single_detector";
    c.kind = ScenarioKind::SingleDetector;
    c.lattice = {256, 256};
    c.theta = kPark;
    ParticleInit p;
    p.packets = {{80, 2.0, Chirality::Right, 1.0}, {176, 2.0, Chirality::Right, 1.0}};
    c.particles = {p};
    c.particle_masses = {1.0};
    c.detectors = {{"y", 0, 80, {74, 86}, 40, 96, 100, 1.0}};
    c.runs = 10000;
    c.seed = 1;
    c.regions = {{"y", {74, 86}}, {"z", {170, 182}}};
    c.cuts = {{"before", flat_cut(39, 256)}, {"after", flat_cut(150, 256)}};
    return c;
}

ScenarioConfig two_detector_config() {
    ScenarioConfig c = single_detector_config();
    c.name = "two_detectors";
    c.kind = ScenarioKind::TwoDetectors;
    c.detectors.push_back({"z", 0, 176, {170, 182}, 41, 192, 196, 1.0});
    return c;
}

ScenarioConfig epr_config(double a, double b) {
    ScenarioConfig c;
    c.name = "epr";
    c.kind = ScenarioKind::Epr;
    c.lattice = {128, 128};
    c.theta = kPark;
    c.coin_windows = {{17, 28, 0.0}};
    c.spin = true;
    c.entanglement = SpinEntanglement::Singlet;
    ParticleInit pa;
    pa.packets = {{32, 2.0, Chirality::Right, 1.0}};
    ParticleInit pb;
    pb.packets = {{96, 2.0, Chirality::Right, 1.0}};
    c.particles = {pa, pb};
    c.particle_masses = {1.0, 1.0};
    c.magnets = {{"A", 0, 16, {24, 40}, a}, {"B", 1, 16, {88, 104}, b}};
    c.detectors = {
        {"A-up", 0, 44, {37, 51}, 30, 2, 4, 1.0},
        {"A-down", 0, 20, {13, 27}, 30, 6, 8, 1.0},
        {"B-up", 1, 108, {101, 115}, 30, 119, 121, 1.0},
        {"B-down", 1, 84, {77, 91}, 30, 123, 125, 1.0},
    };
    c.runs = 10000;
    c.seed = 1;
    c.regions = {{"A-left", {13, 27}}, {"A-right", {37, 51}}, {"B-left", {77, 91}}, {"B-right", {101, 115}}};
    c.cuts = {
        {"sigma1", flat_cut(38, 128)},
        {"sigma2", ramp_cut(128, 30, 38, 56)},
        {"sigma3", ramp_cut(128, 38, 30, 56)},
        {"sigma4", flat_cut(30, 128)},
    };
    return c;
}

EventRecord sample_scenario_record(const ScenarioConfig &config, std::uint64_t seed) {
    config.validate();
    return sample_record(config.initial(), config.detectors, config.grw, seed);
}

ScenarioReport simulate(const ScenarioConfig &config, const RunOptions &options) {
    config.validate();
    const int runs = options.runs > 0 ? options.runs : config.runs;
    CutState psi0 = config.initial();
    RecordSampler sampler(psi0, config.detectors, config.grw);
    const size_t K = config.detectors.size();

    std::vector<Realization> all(static_cast<size_t>(runs));
    parallel_for(runs, options.workers, [&](int r) {
        auto &out = all[static_cast<size_t>(r)];
        out.seed = config.seed + static_cast<std::uint64_t>(r);
        auto record = sampler.sample(out.seed);
        out.outcomes.assign(K, -1);
        for (size_t k = 0; k < K; ++k) {
            if (auto o = record.detector_outcome(static_cast<int>(k))) out.outcomes[k] = *o;
        }
    });

    ScenarioReport rep;
    rep.scenario = config.name;
    rep.kind = config.kind;
    rep.runs = runs;
    rep.seed = config.seed;
    for (const auto &d : config.detectors) rep.detector_ids.push_back(d.id);

    std::map<std::vector<int>, std::pair<long, double>> tally;
    const bool analytic = config.grw.lambda == 0;
    if (analytic) {
        for (const auto &b : enumerate_outcomes(psi0, config.detectors)) tally[b.outcomes].second = b.probability;
    }
    for (const auto &r : all) ++tally[r.outcomes].first;
    rep.born_deviation = analytic ? 0.0 : -1.0;
    for (const auto &[outcomes, entry] : tally) {
        Frequency f;
        f.label = outcome_label(config.detectors, outcomes);
        f.count = entry.first;
        f.frequency = static_cast<double>(entry.first) / runs;
        f.expected = analytic ? entry.second : f.frequency;
        f.bound = 3.0 * std::sqrt(f.expected * (1.0 - f.expected) / runs);
        if (analytic) rep.born_deviation = std::max(rep.born_deviation, std::abs(f.frequency - f.expected));
        rep.frequencies.push_back(f);
    }
    if (options.keep_realizations) rep.realizations = std::move(all);
    else rep.realizations.assign(all.begin(), all.begin() + std::min<size_t>(all.size(), 1));
    return rep;
}

namespace {

void add_tables(const ScenarioConfig &config, const CutState &psi0, const EventRecord &record, int workers,
                ScenarioReport &rep) {
    const auto masses = config.masses();
    for (const auto &c : config.cuts) {
        rep.tables.push_back({c.name, compare_on_cut(c.cut, psi0, record, masses, config.regions, workers)});
    }
}

/// Fields for the first realization of every distinct outcome tuple.
void add_fields(const ScenarioConfig &config, const CutState &psi0, const RunOptions &options,
                const std::vector<Realization> &runs, ScenarioReport &rep) {
    std::set<std::vector<int>> seen;
    const FieldRegion whole{0, config.lattice.T, 0, config.lattice.L - 1};
    for (const auto &r : runs) {
        if (!seen.insert(r.outcomes).second) continue;
        auto record = sample_record(psi0, config.detectors, config.grw, r.seed);
        rep.fields.emplace_back(outcome_label(config.detectors, r.outcomes),
                                m_grid(whole, psi0, record, config.masses(), options.field_stride, options.workers));
    }
}

}  // namespace

ScenarioReport run_single_detector(const ScenarioConfig &config, const RunOptions &options) {
    if (config.kind != ScenarioKind::SingleDetector) throw ValidationError("not a single_detector config");
    RunOptions keep = options;
    keep.keep_realizations = true;
    auto rep = simulate(config, keep);
    CutState psi0 = config.initial();
    if (options.fields) add_fields(config, psi0, options, rep.realizations, rep);
    add_tables(config, psi0, sample_record(psi0, config.detectors, config.grw, config.seed), options.workers, rep);
    if (!options.keep_realizations) rep.realizations.resize(1);
    return rep;
}

ScenarioReport run_two_detectors(const ScenarioConfig &config, const RunOptions &options) {
    if (config.kind != ScenarioKind::TwoDetectors) throw ValidationError("not a two_detectors config");
    RunOptions keep = options;
    keep.keep_realizations = true;
    auto rep = simulate(config, keep);
    CutState psi0 = config.initial();
    if (options.fields) add_fields(config, psi0, options, rep.realizations, rep);
    add_tables(config, psi0, sample_record(psi0, config.detectors, config.grw, config.seed), options.workers, rep);
    if (!options.keep_realizations) rep.realizations.resize(1);
    return rep;
}

ScenarioReport run_epr(const ScenarioConfig &config, const RunOptions &options) {
    if (config.kind != ScenarioKind::Epr) throw ValidationError("not an epr config");
    auto rep = simulate(config, options);
    CutState psi0 = config.initial();
    auto record = sample_record(psi0, config.detectors, config.grw, config.seed);
    add_tables(config, psi0, record, options.workers, rep);
    auto ops = record.operators();
    for (const auto &c : config.cuts) {
        CutState s = advance_to_cut(psi0, c.cut, ops);
        for (int p = 0; p < 2; ++p) {
            auto rho = reduced_spin_state(s, p);
            double purity = 0.0;
            for (auto v : rho) purity += std::norm(v);
            rep.spin_states.push_back({c.name, p, rho, purity});
        }
    }
    if (options.fields) {
        const FieldRegion whole{0, config.lattice.T, 0, config.lattice.L - 1};
        rep.fields.emplace_back("seed" + std::to_string(config.seed),
                                m_grid(whole, psi0, record, config.masses(), options.field_stride, options.workers));
    }
    return rep;
}

ScenarioReport run_scenario(const ScenarioConfig &config, const RunOptions &options) {
    switch (config.kind) {
        case ScenarioKind::SingleDetector:
            return run_single_detector(config, options);
        case ScenarioKind::TwoDetectors:
            return run_two_detectors(config, options);
        case ScenarioKind::Epr:
            return run_epr(config, options);
        case ScenarioKind::Custom:
            break;
    }
    auto rep = simulate(config, options);
    CutState psi0 = config.initial();
    add_tables(config, psi0, sample_record(psi0, config.detectors, config.grw, config.seed), options.workers, rep);
    return rep;
}

double born_agreement(const ScenarioConfig &config, int runs, int workers) {
    if (config.grw.lambda != 0) throw ValidationError("analytic weights need detector-only records");
    RunOptions opt;
    opt.runs = runs;
    opt.workers = workers;
    opt.keep_realizations = false;
    return simulate(config, opt).born_deviation;
}

int epr_observable(const std::vector<int> &outcomes, int up_detector) {
    return outcomes.at(static_cast<size_t>(up_detector)) == kFired ? +1 : -1;
}

ChshResult chsh(const ScenarioConfig &base, std::array<double, 2> a, std::array<double, 2> b, int runs,
                std::uint64_t seed, int workers) {
    ChshResult res;
    const int ua = base.detector_index("A-up");
    const int ub = base.detector_index("B-up");
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 2; ++k) {
            ScenarioConfig c = base;
            for (auto &m : c.magnets) m.angle = m.particle == 0 ? a[static_cast<size_t>(i)] : b[static_cast<size_t>(k)];
            c.seed = seed + static_cast<std::uint64_t>(2 * i + k) * static_cast<std::uint64_t>(runs);
            RunOptions opt;
            opt.runs = runs;
            opt.workers = workers;
            auto rep = simulate(c, opt);
            double e = 0.0;
            for (const auto &r : rep.realizations) e += epr_observable(r.outcomes, ua) * epr_observable(r.outcomes, ub);
            const size_t slot = static_cast<size_t>(2 * i + k);
            res.correlations[slot] = e / runs;
            double ex = 0.0;
            for (const auto &br : enumerate_outcomes(c.initial(), c.detectors)) {
                ex += br.probability * epr_observable(br.outcomes, ua) * epr_observable(br.outcomes, ub);
            }
            res.expected[slot] = ex;
        }
    }
    auto s = [](const std::array<double, 4> &e) { return std::abs(e[0] - e[1] + e[2] + e[3]); };
    res.S = s(res.correlations);
    res.S_expected = s(res.expected);
    return res;
}

}  // namespace lcm
