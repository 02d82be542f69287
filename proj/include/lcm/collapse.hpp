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

#ifndef LCM_COLLAPSE_HPP
#define LCM_COLLAPSE_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lcm/state.hpp"

namespace lcm {

/// Detector at rest: at layer `trigger` it measures whether `particle` is in
/// `window`, flipping its pointer qubit when it fires.
struct DetectorSpec {
    std::string id;
    int particle = 0;
    int site = 0;
    Region window;
    int trigger = 1;
    int ready_site = 0;
    int fired_site = 0;
    double mass = 1.0;

    friend bool operator==(const DetectorSpec &, const DetectorSpec &) = default;
};

/// Spontaneous Gaussian hits. Each particle is hit on each layer in
/// [first_layer, last_layer] with probability lambda.
struct GrwParams {
    double lambda = 0.0;
    double sigma = 8.0;
    int first_layer = 1;
    int last_layer = 0;

    friend bool operator==(const GrwParams &, const GrwParams &) = default;
};

inline constexpr int kNotFired = 0;
inline constexpr int kFired = 1;

struct RealizedEvent {
    Event location;
    CollapseOperator op;
    /// Detector index, or -1 for a spontaneous hit.
    int detector = -1;
    /// kFired / kNotFired for detectors, hit center for hits.
    int outcome = 0;
    /// Born weight of the selected branch when it was sampled.
    double weight = 1.0;
};

/// Realized collapse history, ordered by layer then site. A single record
/// fixes every outcome for every hypersurface.
struct EventRecord {
    std::vector<RealizedEvent> events;

    std::vector<LocatedOperator> operators() const;
    /// Outcome of a detector, if any event with that detector exists.
    std::optional<int> detector_outcome(int detector) const;
};

/// Pointer qubits matching the detector list, all ready.
std::vector<Pointer> pointers_for(std::span<const DetectorSpec> detectors);

void validate_detectors(std::span<const DetectorSpec> detectors, const Lattice &lattice, int particles);

/// Deterministic per-seed sampling of the collapse history. Sweeps flat
/// layers upward; detector branches and hit centers are drawn with Born
/// weights from one mt19937_64 stream (uniforms use the top 53 bits).
class RecordSampler {
   public:
    RecordSampler(CutState initial, std::vector<DetectorSpec> detectors, GrwParams grw);

    EventRecord sample(std::uint64_t seed) const;
    const CutState &initial() const { return initial_; }
    const std::vector<DetectorSpec> &detectors() const { return detectors_; }
    /// Candidate hit centers, extended 10 sigma past both edges so the
    /// normalization over centers does not depend on the state.
    std::pair<int, int> hit_center_range() const;

   private:
    CutState initial_;
    std::vector<DetectorSpec> detectors_;
    GrwParams grw_;
    int last_layer_ = 0;
    // Branch states keyed by (outcome prefix, layer); only used without hits.
    mutable std::mutex mutex_;
    struct Node {
        std::shared_ptr<const CutState> pre;
        double w_fire = 0.0;
        double w_miss = 0.0;
    };
    mutable std::map<std::vector<int>, Node> cache_;
};

EventRecord sample_record(const CutState &initial, std::span<const DetectorSpec> detectors, const GrwParams &grw,
                          std::uint64_t seed);

/// One leaf of the exhaustive detector branching.
struct BranchOutcome {
    std::vector<int> outcomes;
    double probability = 0.0;
    EventRecord record;
};

/// Enumerates every detector outcome combination with analytic Born
/// weights, dropping branches below 1e-15. Hits are not allowed.
std::vector<BranchOutcome> enumerate_outcomes(const CutState &initial, std::span<const DetectorSpec> detectors);

/// A two-outcome detection or a Gaussian hit, used by the order check.
struct Measurement {
    enum class Kind { Detection, Hit };
    Kind kind = Kind::Detection;
    Event location;
    int particle = 0;
    Region window;
    double sigma = 8.0;
};

/// Computes the joint outcome distribution of two spacelike measurements
/// with either one applied first (Heisenberg-transported to a common layer)
/// and returns the largest absolute difference.
double order_swap_check(const CutState &initial, const Measurement &a, const Measurement &b);

/// The recorded outcome if the detection lies strictly below the cut.
std::optional<int> outcome_on_cut(const EventRecord &record, std::span<const DetectorSpec> detectors, const Cut &cut,
                                  const std::string &detector_id);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64 &rng);

}  // namespace lcm

#endif
