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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lcm/io.hpp"

namespace fs = std::filesystem;
using namespace lcm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInternal = 2;

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int workers = 0;
    std::string out;
};

int workers_of(const Common &c) { return c.workers > 0 ? c.workers : default_workers(); }

std::string config_digest(const ScenarioConfig &c) { return digest(config_to_json(c).dump()); }

void emit(const std::string &text, const std::string &out) {
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file(out, text);
    }
}

int cmd_simulate(const Common &c, int runs, const std::string &fields_dir) {
    ScenarioConfig cfg = parse_config(c.config);
    if (c.seed_given) cfg.seed = c.seed;
    RunOptions opt;
    opt.runs = runs;
    opt.workers = workers_of(c);
    opt.fields = !fields_dir.empty();
    auto rep = run_scenario(cfg, opt);
    emit(report_to_json(rep).dump(2) + "\n", c.out);
    if (c.out.empty()) return kExitOk;
    RunManifest m;
    m.command = "simulate";
    m.config_digest = config_digest(cfg);
    for (int r = 0; r < rep.runs; ++r) m.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(r));
    m.parameters = {{"runs", rep.runs}, {"seed", cfg.seed}};
    m.outputs.push_back(c.out);
    if (!fields_dir.empty()) {
        fs::create_directories(fields_dir);
        for (size_t k = 0; k < rep.fields.size(); ++k) {
            fs::path p = fs::path(fields_dir) / ("field" + std::to_string(k) + ".csv");
            std::ostringstream ss;
            write_field_csv(rep.fields[k].second, ss);
            write_file(p, ss.str());
            m.outputs.push_back(p);
        }
    }
    m.write(c.out + ".manifest.json");
    return kExitOk;
}

int cmd_mfield(const Common &c, int stride, const std::vector<int> &window) {
    ScenarioConfig cfg = parse_config(c.config);
    const std::uint64_t seed = c.seed_given ? c.seed : cfg.seed;
    FieldRegion region{0, cfg.lattice.T, 0, cfg.lattice.L - 1};
    if (!window.empty()) {
        if (window.size() != 4) throw ValidationError("--region takes T0 T1 J0 J1");
        region = {window[0], window[1], window[2], window[3]};
    }
    CutState psi0 = cfg.initial();
    auto record = sample_record(psi0, cfg.detectors, cfg.grw, seed);
    auto field = m_grid(region, psi0, record, cfg.masses(), stride, workers_of(c));
    std::ostringstream ss;
    write_field_csv(field, ss);
    emit(ss.str(), c.out);
    if (c.out.empty()) return kExitOk;
    RunManifest m;
    m.command = "mfield";
    m.config_digest = config_digest(cfg);
    m.seeds = {seed};
    m.parameters = {{"stride", stride},
                    {"region", {region.t_lo, region.t_hi, region.j_lo, region.j_hi}},
                    {"events", record.events.size()}};
    m.outputs.push_back(c.out);
    m.write(c.out + ".manifest.json");
    return kExitOk;
}

int cmd_compare(const Common &c, const std::string &cut_spec) {
    ScenarioConfig cfg = parse_config(c.config);
    const std::uint64_t seed = c.seed_given ? c.seed : cfg.seed;
    Cut cut = parse_cut_spec(cut_spec, cfg);
    if (cfg.regions.empty()) throw ValidationError("config defines no regions to compare");
    CutState psi0 = cfg.initial();
    auto record = sample_record(psi0, cfg.detectors, cfg.grw, seed);
    auto rows = compare_on_cut(cut, psi0, record, cfg.masses(), cfg.regions, workers_of(c));
    nlohmann::json doc;
    doc["cut"] = cut_spec;
    doc["heights"] = cut.heights();
    doc["seed"] = seed;
    doc["outcomes"] = nlohmann::json::array();
    for (const auto &e : record.events) {
        if (e.detector < 0) continue;
        auto seen = outcome_on_cut(record, cfg.detectors, cut, cfg.detectors[static_cast<size_t>(e.detector)].id);
        doc["outcomes"].push_back({{"detector", cfg.detectors[static_cast<size_t>(e.detector)].id},
                                   {"outcome", e.outcome == kFired ? "fired" : "not"},
                                   {"on_cut", seen ? (*seen == kFired ? "fired" : "not") : "not yet"}});
    }
    doc["rows"] = table_to_json(rows);
    emit(doc.dump(2) + "\n", c.out);
    if (c.out.empty()) return kExitOk;
    RunManifest m;
    m.command = "compare";
    m.config_digest = config_digest(cfg);
    m.seeds = {seed};
    m.parameters = {{"cut", cut_spec}};
    m.outputs.push_back(c.out);
    m.write(c.out + ".manifest.json");
    return kExitOk;
}

int cmd_render(const std::string &in, const std::string &out) {
    std::ifstream src(in);
    if (!src) throw ValidationError("cannot read " + in);
    auto field = read_field_csv(src);
    std::ostringstream ss;
    write_pgm(field, ss);
    write_file(out, ss.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Matter density fields of collapse dynamics on a 1+1D lattice"};
    app.require_subcommand(1);
    Common common;
    int runs = -1;
    int stride = 1;
    std::vector<int> window;
    std::string fields_dir, cut_spec, render_in, render_out;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", common.config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "base seed")->each([&](const std::string &) { common.seed_given = true; });
        sub->add_option("--workers", common.workers, "worker threads (default: LCMATTER_WORKERS or all cores)");
        sub->add_option("--out", common.out, "output file (default: stdout)");
    };

    auto *sim = app.add_subcommand("simulate", "sample realizations and report outcome statistics");
    add_common(sim);
    sim->add_option("--runs", runs, "number of realizations (default: config runs)");
    sim->add_option("--fields-dir", fields_dir, "also write representative matter fields here");

    auto *mf = app.add_subcommand("mfield", "relativistic matter field of one realization as CSV");
    add_common(mf);
    mf->add_option("--stride", stride, "grid stride")->check(CLI::PositiveNumber);
    mf->add_option("--region", window, "T0 T1 J0 J1")->expected(4);

    auto *cmp = app.add_subcommand("compare", "region sums of both laws on a cut");
    add_common(cmp);
    cmp->add_option("--cut", cut_spec, "named cut, flat:T or boost:V:T0,J0")->required();

    auto *ren = app.add_subcommand("render", "render a field CSV to a PGM image");
    ren->add_option("--in", render_in, "field CSV")->required();
    ren->add_option("--out", render_out, "PGM output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*sim) return cmd_simulate(common, runs, fields_dir);
        if (*mf) return cmd_mfield(common, stride, window);
        if (*cmp) return cmd_compare(common, cut_spec);
        if (*ren) return cmd_render(render_in, render_out);
    } catch (const InconsistentRecord &e) {
        std::cerr << "inconsistent record: " << e.what() << "\n";
        return kExitInternal;
    } catch (const ValidationError &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInvalid;
}
