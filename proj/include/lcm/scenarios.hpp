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

#ifndef LCM_SCENARIOS_HPP
#define LCM_SCENARIOS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lcm/matter.hpp"

namespace lcm {

enum class ScenarioKind { SingleDetector, TwoDetectors, Epr, Custom };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string &name);

struct NamedCut {
    std::string name;
    Cut cut;

    friend bool operator==(const NamedCut &, const NamedCut &) = default;
};

struct ScenarioConfig {
    std::string name = "custom";
    ScenarioKind kind = ScenarioKind::Custom;
    Lattice lattice{64, 64};
    double theta = 0.1;
    std::vector<CoinWindow> coin_windows;
    bool spin = false;
    SpinEntanglement entanglement = SpinEntanglement::Product;
    std::vector<ParticleInit> particles;
    std::vector<double> particle_masses;
    std::vector<MagnetGate> magnets;
    std::vector<DetectorSpec> detectors;
    GrwParams grw;
    int runs = 1000;
    std::uint64_t seed = 1;
    std::vector<NamedRegion> regions;
    std::vector<NamedCut> cuts;
    bool well_localized = true;

    friend bool operator==(const ScenarioConfig &, const ScenarioConfig &) = default;

    std::shared_ptr<const Dynamics> dynamics() const;
    CutState initial() const;
    MassAssignment masses() const;
    /// Checks every precondition that can be checked before running.
    void validate() const;
    const NamedRegion &region(const std::string &name) const;
    const Cut &cut(const std::string &name) const;
    int detector_index(const std::string &id) const;
};

ScenarioConfig single_detector_config();
ScenarioConfig two_detector_config();
/// Singlet pair with magnets at orientations a (particle 0) and b (particle 1).
ScenarioConfig epr_config(double a = 0.0, double b = 0.0);

struct Realization {
    std::uint64_t seed = 0;
    std::vector<int> outcomes;
};

struct Frequency {
    std::string label;
    long count = 0;
    double frequency = 0.0;
    /// Analytic Born weight of the same outcome set.
    double expected = 0.0;
    /// Three-sigma binomial half-width around `expected`.
    double bound = 0.0;
};

struct CutTable {
    std::string cut;
    std::vector<ComparisonRow> rows;
};

struct SpinReport {
    std::string cut;
    int particle = 0;
    std::array<cplx, 4> rho{};
    double purity = 0.0;
};

struct ScenarioReport {
    std::string scenario;
    ScenarioKind kind = ScenarioKind::Custom;
    int runs = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> detector_ids;
    std::vector<Realization> realizations;
    std::vector<Frequency> frequencies;
    /// Largest |frequency - expected| over all outcome tuples.
    double born_deviation = 0.0;
    std::vector<CutTable> tables;
    std::vector<SpinReport> spin_states;
    /// Matter fields of representative realizations keyed by label.
    std::vector<std::pair<std::string, MatterField>> fields;
};

struct RunOptions {
    int runs = -1;
    int workers = 1;
    bool fields = true;
    int field_stride = 1;
    bool keep_realizations = true;
};

/// Samples `runs` realizations with seeds seed, seed+1, ... and tallies
/// the outcome tuples against the analytic branch weights.
ScenarioReport simulate(const ScenarioConfig &config, const RunOptions &options = {});

ScenarioReport run_single_detector(const ScenarioConfig &config, const RunOptions &options = {});
ScenarioReport run_two_detectors(const ScenarioConfig &config, const RunOptions &options = {});
ScenarioReport run_epr(const ScenarioConfig &config, const RunOptions &options = {});
ScenarioReport run_scenario(const ScenarioConfig &config, const RunOptions &options = {});

/// Max deviation between sampled joint frequencies and analytic weights.
double born_agreement(const ScenarioConfig &config, int runs = -1, int workers = 1);

/// Spin observable of one side: +1 iff its up-channel detector fired.
int epr_observable(const std::vector<int> &outcomes, int up_detector);

struct ChshResult {
    std::array<double, 4> correlations{};
    std::array<double, 4> expected{};
    double S = 0.0;
    double S_expected = 0.0;
};

/// CHSH value over settings (a, a') x (b, b'), `runs` realizations each.
ChshResult chsh(const ScenarioConfig &base, std::array<double, 2> a, std::array<double, 2> b, int runs,
                std::uint64_t seed, int workers = 1);

/// Record of one realization of the configured scenario.
EventRecord sample_scenario_record(const ScenarioConfig &config, std::uint64_t seed);

}  // namespace lcm

#endif
