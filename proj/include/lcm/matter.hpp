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

#ifndef LCM_MATTER_HPP
#define LCM_MATTER_HPP

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lcm/collapse.hpp"

namespace lcm {

/// Rectangle of events: layers [t_lo, t_hi] times sites [j_lo, j_hi].
struct FieldRegion {
    int t_lo = 0;
    int t_hi = 0;
    int j_lo = 0;
    int j_hi = 0;

    friend bool operator==(const FieldRegion &, const FieldRegion &) = default;
};

enum class Law { Rel, Flat };

/// m sampled on every stride-th event of a region, rows ordered by layer.
struct MatterField {
    FieldRegion region;
    int stride = 1;
    Law law = Law::Rel;
    std::vector<int> layers;
    std::vector<int> sites;
    std::vector<double> values;

    size_t rows() const { return layers.size(); }
    size_t cols() const { return sites.size(); }
    double at(size_t row, size_t col) const { return values[row * sites.size() + col]; }
    double max_value() const;
};

/// Relativistic law: apex mass of the state on the past light cone of x,
/// plus pointer masses displayed at x.j there.
double m_rel(const Event &x, const CutState &psi0, const EventRecord &record, const MassAssignment &masses);

/// Naive law on a cut through x.
double m_flat(const Event &x, const Cut &cut, const CutState &psi0, const EventRecord &record,
              const MassAssignment &masses);

/// Batched m_rel. Points are grouped by the record events in their past
/// cones; each group replays a flat-frame evolution starting from the
/// latest shared checkpoint.
class MatterEvaluator {
   public:
    MatterEvaluator(CutState psi0, EventRecord record, MassAssignment masses);

    std::vector<double> m_rel_many(std::span<const Event> points, int workers = 1) const;
    const CutState &initial() const { return psi0_; }
    const EventRecord &record() const { return record_; }

   private:
    using Key = std::vector<int>;
    std::shared_ptr<const CutState> find_checkpoint(const Key &group, int limit, int &layer) const;
    void run_group(const Key &group, std::span<const size_t> members, std::span<const Event> points,
                   std::span<double> out) const;

    CutState psi0_;
    EventRecord record_;
    MassAssignment masses_;
    std::vector<int> event_layers_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<Key, int>, std::shared_ptr<const CutState>> checkpoints_;
};

MatterField m_grid(const FieldRegion &region, const CutState &psi0, const EventRecord &record,
                   const MassAssignment &masses, int stride = 1, int workers = 1);

struct NamedRegion {
    std::string name;
    Region region;

    friend bool operator==(const NamedRegion &, const NamedRegion &) = default;
};

struct ComparisonRow {
    std::string name;
    Region region;
    double rel = 0.0;
    double flat = 0.0;
};

/// Region sums of both laws on the events of a cut.
std::vector<ComparisonRow> compare_on_cut(const Cut &cut, const CutState &psi0, const EventRecord &record,
                                          const MassAssignment &masses, std::span<const NamedRegion> regions,
                                          int workers = 1);

/// Worker count from LCMATTER_WORKERS, else hardware concurrency.
int default_workers();

}  // namespace lcm

#endif
