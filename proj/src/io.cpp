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

#include "lcm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lcm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &what) {
    throw ConfigError((path.empty() ? std::string("/") : path) + ": " + what);
}

void allow_keys(const json &j, const std::string &path, std::initializer_list<const char *> keys) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto &[k, v] : j.items()) {
        bool ok = false;
        for (const char *a : keys) ok = ok || k == a;
        if (!ok) fail(path, "unknown key '" + k + "'");
    }
}

const json &need(const json &j, const std::string &path, const char *key) {
    if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
    return j.at(key);
}

int as_int(const json &j, const std::string &path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

double as_double(const json &j, const std::string &path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

bool as_bool(const json &j, const std::string &path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const json &j, const std::string &path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

const json &as_array(const json &j, const std::string &path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

int int_or(const json &j, const std::string &path, const char *key, int def) {
    return j.contains(key) ? as_int(j.at(key), path + "/" + key) : def;
}

double double_or(const json &j, const std::string &path, const char *key, double def) {
    return j.contains(key) ? as_double(j.at(key), path + "/" + key) : def;
}

cplx as_complex(const json &j, const std::string &path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) fail(path, "expected a number or [re, im]");
    return {as_double(j[0], path + "/0"), as_double(j[1], path + "/1")};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

Region as_window(const json &j, const std::string &path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [lo, hi]");
    Region r{as_int(j[0], path + "/0"), as_int(j[1], path + "/1")};
    if (r.lo > r.hi) fail(path, "window lo exceeds hi");
    return r;
}

json window_json(const Region &r) { return json::array({r.lo, r.hi}); }

Cut cut_from_json(const json &j, const std::string &path, const Lattice &lat) {
    int forms = static_cast<int>(j.contains("flat")) + static_cast<int>(j.contains("heights")) +
                static_cast<int>(j.contains("ramp")) + static_cast<int>(j.contains("boost"));
    if (forms != 1) fail(path, "exactly one of flat, heights, ramp, boost required");
    try {
        if (j.contains("flat")) return flat_cut(as_int(j.at("flat"), path + "/flat"), lat.L);
        if (j.contains("heights")) {
            std::vector<int> f;
            const auto &h = as_array(j.at("heights"), path + "/heights");
            for (size_t k = 0; k < h.size(); ++k) f.push_back(as_int(h[k], path + "/heights/" + std::to_string(k)));
            return Cut(std::move(f));
        }
        if (j.contains("ramp")) {
            const std::string p = path + "/ramp";
            const auto &r = j.at("ramp");
            allow_keys(r, p, {"from", "to", "start"});
            int from = as_int(need(r, p, "from"), p + "/from");
            int to = as_int(need(r, p, "to"), p + "/to");
            int start = as_int(need(r, p, "start"), p + "/start");
            std::vector<int> f(static_cast<size_t>(lat.L));
            const int step = to >= from ? 1 : -1;
            for (int q = 0; q < lat.L; ++q) {
                f[static_cast<size_t>(q)] = std::clamp(from + step * (q - start), std::min(from, to), std::max(from, to));
            }
            return Cut(std::move(f));
        }
        const std::string p = path + "/boost";
        const auto &b = j.at("boost");
        allow_keys(b, p, {"v", "anchor"});
        const auto &a = need(b, p, "anchor");
        if (!a.is_array() || a.size() != 2) fail(p + "/anchor", "expected [t, j]");
        Event anchor{as_int(a[0], p + "/anchor/0"), as_int(a[1], p + "/anchor/1")};
        const auto &v = need(b, p, "v");
        std::string text = v.is_string() ? v.get<std::string>() : v.dump();
        return boosted_cut(Rational::parse(text), anchor, lat);
    } catch (const ConfigError &) {
        throw;
    } catch (const ValidationError &e) {
        fail(path, e.what());
    }
}

void line_col(const std::string &text, size_t byte, size_t &line, size_t &col) {
    line = 1;
    col = 1;
    for (size_t k = 0; k < std::min(byte, text.size()); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

}  // namespace

ScenarioConfig config_from_json(const json &doc) {
    allow_keys(doc, "", {"schema_version", "name", "kind", "lattice", "spin", "entanglement", "particles", "magnets",
                         "detectors", "grw", "runs", "seed", "regions", "cuts", "well_localized"});
    const int version = as_int(need(doc, "", "schema_version"), "/schema_version");
    if (version != kSchemaVersion) {
        fail("/schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                    std::to_string(kSchemaVersion) + ")");
    }
    ScenarioConfig c;
    c.name = doc.contains("name") ? as_string(doc.at("name"), "/name") : "custom";
    if (doc.contains("kind")) {
        try {
            c.kind = scenario_kind_from_string(as_string(doc.at("kind"), "/kind"));
        } catch (const ConfigError &) {
            throw;
        } catch (const ValidationError &e) {
            fail("/kind", e.what());
        }
    }

    const auto &lat = need(doc, "", "lattice");
    allow_keys(lat, "/lattice", {"L", "T", "theta", "coin_windows"});
    c.lattice.L = as_int(need(lat, "/lattice", "L"), "/lattice/L");
    c.lattice.T = as_int(need(lat, "/lattice", "T"), "/lattice/T");
    c.theta = double_or(lat, "/lattice", "theta", 0.1);
    if (lat.contains("coin_windows")) {
        const auto &ws = as_array(lat.at("coin_windows"), "/lattice/coin_windows");
        for (size_t k = 0; k < ws.size(); ++k) {
            const std::string p = "/lattice/coin_windows/" + std::to_string(k);
            allow_keys(ws[k], p, {"begin", "end", "theta"});
            c.coin_windows.push_back({as_int(need(ws[k], p, "begin"), p + "/begin"),
                                      as_int(need(ws[k], p, "end"), p + "/end"),
                                      as_double(need(ws[k], p, "theta"), p + "/theta")});
        }
    }

    c.spin = doc.contains("spin") && as_bool(doc.at("spin"), "/spin");
    if (doc.contains("entanglement")) {
        auto e = as_string(doc.at("entanglement"), "/entanglement");
        if (e == "product") c.entanglement = SpinEntanglement::Product;
        else if (e == "singlet") c.entanglement = SpinEntanglement::Singlet;
        else fail("/entanglement", "expected 'product' or 'singlet'");
    }

    const auto &ps = as_array(need(doc, "", "particles"), "/particles");
    bool any_mass = false;
    for (size_t k = 0; k < ps.size(); ++k) {
        const std::string p = "/particles/" + std::to_string(k);
        allow_keys(ps[k], p, {"mass", "spin", "packets"});
        ParticleInit pi;
        any_mass = any_mass || ps[k].contains("mass");
        c.particle_masses.push_back(double_or(ps[k], p, "mass", 1.0));
        if (ps[k].contains("spin")) {
            const auto &s = ps[k].at("spin");
            if (!s.is_array() || s.size() != 2) fail(p + "/spin", "expected [up, down]");
            pi.spin = {as_complex(s[0], p + "/spin/0"), as_complex(s[1], p + "/spin/1")};
        }
        const auto &pk = as_array(need(ps[k], p, "packets"), p + "/packets");
        for (size_t q = 0; q < pk.size(); ++q) {
            const std::string pp = p + "/packets/" + std::to_string(q);
            allow_keys(pk[q], pp, {"center", "sigma", "chirality", "coefficient"});
            PacketTerm t;
            t.center = as_int(need(pk[q], pp, "center"), pp + "/center");
            t.sigma = double_or(pk[q], pp, "sigma", 2.0);
            if (pk[q].contains("chirality")) {
                auto ch = as_string(pk[q].at("chirality"), pp + "/chirality");
                if (ch == "R") t.chirality = Chirality::Right;
                else if (ch == "L") t.chirality = Chirality::Left;
                else fail(pp + "/chirality", "expected 'R' or 'L'");
            }
            if (pk[q].contains("coefficient")) t.coefficient = as_complex(pk[q].at("coefficient"), pp + "/coefficient");
            pi.packets.push_back(t);
        }
        c.particles.push_back(pi);
    }
    if (!any_mass) c.particle_masses.assign(c.particles.size(), 1.0);

    if (doc.contains("magnets")) {
        const auto &ms = as_array(doc.at("magnets"), "/magnets");
        for (size_t k = 0; k < ms.size(); ++k) {
            const std::string p = "/magnets/" + std::to_string(k);
            allow_keys(ms[k], p, {"id", "particle", "layer", "window", "angle"});
            MagnetGate g;
            g.id = as_string(need(ms[k], p, "id"), p + "/id");
            g.particle = as_int(need(ms[k], p, "particle"), p + "/particle");
            g.layer = as_int(need(ms[k], p, "layer"), p + "/layer");
            g.window = as_window(need(ms[k], p, "window"), p + "/window");
            g.angle = double_or(ms[k], p, "angle", 0.0);
            c.magnets.push_back(g);
        }
    }

    if (doc.contains("detectors")) {
        const auto &ds = as_array(doc.at("detectors"), "/detectors");
        for (size_t k = 0; k < ds.size(); ++k) {
            const std::string p = "/detectors/" + std::to_string(k);
            allow_keys(ds[k], p, {"id", "particle", "site", "window", "trigger", "pointer", "mass"});
            DetectorSpec d;
            d.id = as_string(need(ds[k], p, "id"), p + "/id");
            d.particle = int_or(ds[k], p, "particle", 0);
            d.site = as_int(need(ds[k], p, "site"), p + "/site");
            d.window = as_window(need(ds[k], p, "window"), p + "/window");
            d.trigger = as_int(need(ds[k], p, "trigger"), p + "/trigger");
            const auto &ptr = need(ds[k], p, "pointer");
            allow_keys(ptr, p + "/pointer", {"ready", "fired"});
            d.ready_site = as_int(need(ptr, p + "/pointer", "ready"), p + "/pointer/ready");
            d.fired_site = as_int(need(ptr, p + "/pointer", "fired"), p + "/pointer/fired");
            d.mass = double_or(ds[k], p, "mass", 1.0);
            c.detectors.push_back(d);
        }
    }

    if (doc.contains("grw")) {
        const auto &g = doc.at("grw");
        allow_keys(g, "/grw", {"lambda", "sigma", "first_layer", "last_layer"});
        c.grw.lambda = double_or(g, "/grw", "lambda", 0.0);
        c.grw.sigma = double_or(g, "/grw", "sigma", 8.0);
        c.grw.first_layer = int_or(g, "/grw", "first_layer", 1);
        c.grw.last_layer = int_or(g, "/grw", "last_layer", c.lattice.T);
    } else {
        c.grw.last_layer = c.lattice.T;
    }

    c.runs = int_or(doc, "", "runs", 1000);
    if (doc.contains("seed")) {
        const auto &s = doc.at("seed");
        if (!s.is_number_unsigned()) fail("/seed", "expected a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }

    if (doc.contains("regions")) {
        const auto &rs = as_array(doc.at("regions"), "/regions");
        for (size_t k = 0; k < rs.size(); ++k) {
            const std::string p = "/regions/" + std::to_string(k);
            allow_keys(rs[k], p, {"name", "window"});
            c.regions.push_back({as_string(need(rs[k], p, "name"), p + "/name"),
                                 as_window(need(rs[k], p, "window"), p + "/window")});
        }
    }
    if (doc.contains("cuts")) {
        const auto &cs = as_array(doc.at("cuts"), "/cuts");
        for (size_t k = 0; k < cs.size(); ++k) {
            const std::string p = "/cuts/" + std::to_string(k);
            allow_keys(cs[k], p, {"name", "flat", "heights", "ramp", "boost"});
            c.cuts.push_back({as_string(need(cs[k], p, "name"), p + "/name"), cut_from_json(cs[k], p, c.lattice)});
        }
    }
    c.well_localized = !doc.contains("well_localized") || as_bool(doc.at("well_localized"), "/well_localized");
    return c;
}

json config_to_json(const ScenarioConfig &c) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["name"] = c.name;
    doc["kind"] = to_string(c.kind);
    json lat{{"L", c.lattice.L}, {"T", c.lattice.T}, {"theta", c.theta}};
    if (!c.coin_windows.empty()) {
        lat["coin_windows"] = json::array();
        for (const auto &w : c.coin_windows) lat["coin_windows"].push_back({{"begin", w.begin}, {"end", w.end}, {"theta", w.theta}});
    }
    doc["lattice"] = lat;
    doc["spin"] = c.spin;
    doc["entanglement"] = c.entanglement == SpinEntanglement::Singlet ? "singlet" : "product";
    doc["particles"] = json::array();
    for (size_t k = 0; k < c.particles.size(); ++k) {
        const auto &pi = c.particles[k];
        json p;
        p["mass"] = k < c.particle_masses.size() ? c.particle_masses[k] : 1.0;
        p["spin"] = json::array({complex_json(pi.spin[0]), complex_json(pi.spin[1])});
        p["packets"] = json::array();
        for (const auto &t : pi.packets) {
            p["packets"].push_back({{"center", t.center},
                                    {"sigma", t.sigma},
                                    {"chirality", t.chirality == Chirality::Right ? "R" : "L"},
                                    {"coefficient", complex_json(t.coefficient)}});
        }
        doc["particles"].push_back(p);
    }
    doc["magnets"] = json::array();
    for (const auto &m : c.magnets) {
        doc["magnets"].push_back({{"id", m.id}, {"particle", m.particle}, {"layer", m.layer},
                                  {"window", window_json(m.window)}, {"angle", m.angle}});
    }
    doc["detectors"] = json::array();
    for (const auto &d : c.detectors) {
        doc["detectors"].push_back({{"id", d.id},
                                    {"particle", d.particle},
                                    {"site", d.site},
                                    {"window", window_json(d.window)},
                                    {"trigger", d.trigger},
                                    {"pointer", {{"ready", d.ready_site}, {"fired", d.fired_site}}},
                                    {"mass", d.mass}});
    }
    doc["grw"] = {{"lambda", c.grw.lambda}, {"sigma", c.grw.sigma}, {"first_layer", c.grw.first_layer},
                  {"last_layer", c.grw.last_layer}};
    doc["runs"] = c.runs;
    doc["seed"] = c.seed;
    doc["regions"] = json::array();
    for (const auto &r : c.regions) doc["regions"].push_back({{"name", r.name}, {"window", window_json(r.region)}});
    doc["cuts"] = json::array();
    for (const auto &cut : c.cuts) doc["cuts"].push_back({{"name", cut.name}, {"heights", cut.cut.heights()}});
    doc["well_localized"] = c.well_localized;
    return doc;
}

ScenarioConfig parse_config_text(const std::string &text, const std::string &source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        size_t line = 0, col = 0;
        line_col(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
    ScenarioConfig c;
    try {
        c = config_from_json(doc);
    } catch (const ConfigError &e) {
        throw ConfigError(source + ": " + e.what());
    }
    c.validate();
    return c;
}

ScenarioConfig parse_config(const std::filesystem::path &path) {
    return parse_config_text(read_file(path), path.string());
}

Cut parse_cut_spec(const std::string &spec, const ScenarioConfig &config) {
    for (const auto &c : config.cuts) {
        if (c.name == spec) return c.cut;
    }
    if (spec.rfind("flat:", 0) == 0) {
        try {
            size_t used = 0;
            int t = std::stoi(spec.substr(5), &used);
            if (used == spec.size() - 5 && t >= 0 && t <= config.lattice.T) return flat_cut(t, config.lattice.L);
        } catch (const std::exception &) {
        }
        throw ValidationError("bad cut spec '" + spec + "' (flat:T with 0 <= T <= " + std::to_string(config.lattice.T) + ")");
    }
    if (spec.rfind("boost:", 0) == 0) {
        auto rest = spec.substr(6);
        auto colon = rest.find(':');
        auto comma = rest.find(',', colon == std::string::npos ? 0 : colon);
        if (colon == std::string::npos || comma == std::string::npos) {
            throw ValidationError("bad cut spec '" + spec + "' (boost:V:T0,J0)");
        }
        try {
            Rational v = Rational::parse(rest.substr(0, colon));
            Event anchor{std::stoi(rest.substr(colon + 1, comma - colon - 1)), std::stoi(rest.substr(comma + 1))};
            return boosted_cut(v, anchor, config.lattice);
        } catch (const ValidationError &) {
            throw;
        } catch (const std::exception &) {
            throw ValidationError("bad cut spec '" + spec + "' (boost:V:T0,J0)");
        }
    }
    throw ValidationError("unknown cut '" + spec + "'");
}

void write_field_csv(const MatterField &field, std::ostream &out) {
    out << "t,j,m\n";
    char buf[64];
    for (size_t r = 0; r < field.rows(); ++r) {
        for (size_t c = 0; c < field.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", field.layers[r], field.sites[c], field.at(r, c));
            out << buf;
        }
    }
}

MatterField read_field_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,j,m") throw ValidationError("field file must start with 't,j,m'");
    std::map<std::pair<int, int>, double> cells;
    std::set<int> layers, sites;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int t = 0, j = 0;
        char *end = nullptr;
        std::istringstream ss(line);
        std::string a, b, m;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, m)) {
            throw ValidationError("field file line " + std::to_string(lineno) + ": expected t,j,m");
        }
        try {
            t = std::stoi(a);
            j = std::stoi(b);
        } catch (const std::exception &) {
            throw ValidationError("field file line " + std::to_string(lineno) + ": bad event");
        }
        double v = std::strtod(m.c_str(), &end);
        if (end == m.c_str() || !std::isfinite(v) || v < 0) {
            throw ValidationError("field file line " + std::to_string(lineno) + ": bad value");
        }
        if (!cells.emplace(std::pair(t, j), v).second) {
            throw ValidationError("field file line " + std::to_string(lineno) + ": duplicate event");
        }
        layers.insert(t);
        sites.insert(j);
    }
    if (cells.empty()) throw ValidationError("field file has no rows");
    if (cells.size() != layers.size() * sites.size()) throw ValidationError("field file is not a full grid");
    MatterField f;
    f.layers.assign(layers.begin(), layers.end());
    f.sites.assign(sites.begin(), sites.end());
    f.region = {f.layers.front(), f.layers.back(), f.sites.front(), f.sites.back()};
    f.stride = f.sites.size() > 1 ? f.sites[1] - f.sites[0] : (f.layers.size() > 1 ? f.layers[1] - f.layers[0] : 1);
    for (int t : f.layers) {
        for (int j : f.sites) f.values.push_back(cells.at({t, j}));
    }
    return f;
}

void write_pgm(const MatterField &field, std::ostream &out) {
    const double mx = field.max_value();
    out << "P2\n" << field.cols() << " " << field.rows() << "\n255\n";
    for (size_t r = field.rows(); r-- > 0;) {
        for (size_t c = 0; c < field.cols(); ++c) {
            long px = mx > 0 ? std::lround(255.0 * field.at(r, c) / mx) : 0;
            out << (c ? " " : "") << px;
        }
        out << "\n";
    }
}

json table_to_json(const std::vector<ComparisonRow> &rows) {
    json out = json::array();
    for (const auto &r : rows) {
        out.push_back({{"region", r.name}, {"window", window_json(r.region)}, {"m_rel", r.rel}, {"m_flat", r.flat}});
    }
    return out;
}

json report_to_json(const ScenarioReport &rep) {
    json doc;
    doc["scenario"] = rep.scenario;
    doc["kind"] = to_string(rep.kind);
    doc["runs"] = rep.runs;
    doc["seed"] = rep.seed;
    doc["detectors"] = rep.detector_ids;
    doc["realizations"] = json::array();
    for (const auto &r : rep.realizations) doc["realizations"].push_back({{"seed", r.seed}, {"outcomes", r.outcomes}});
    doc["frequencies"] = json::array();
    for (const auto &f : rep.frequencies) {
        doc["frequencies"].push_back({{"label", f.label},
                                      {"count", f.count},
                                      {"frequency", f.frequency},
                                      {"expected", f.expected},
                                      {"bound", f.bound}});
    }
    doc["born_deviation"] = rep.born_deviation;
    doc["tables"] = json::array();
    for (const auto &t : rep.tables) doc["tables"].push_back({{"cut", t.cut}, {"rows", table_to_json(t.rows)}});
    doc["spin_states"] = json::array();
    for (const auto &s : rep.spin_states) {
        json rho = json::array();
        for (auto v : s.rho) rho.push_back(complex_json(v));
        doc["spin_states"].push_back({{"cut", s.cut}, {"particle", s.particle}, {"rho", rho}, {"purity", s.purity}});
    }
    doc["fields"] = json::array();
    for (const auto &[label, f] : rep.fields) {
        doc["fields"].push_back({{"label", label}, {"rows", f.rows()}, {"cols", f.cols()}, {"stride", f.stride},
                                 {"max", f.max_value()}});
    }
    return doc;
}

std::string digest(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json RunManifest::to_json() const {
    json doc;
    doc["artifact_version"] = kArtifactVersion;
    doc["command"] = command;
    doc["config_digest"] = config_digest;
    doc["seeds"] = seeds;
    doc["parameters"] = parameters;
    doc["outputs"] = json::array();
    for (const auto &p : outputs) {
        std::string bytes = read_file(p);
        doc["outputs"].push_back({{"path", p.filename().string()}, {"bytes", bytes.size()}, {"digest", digest(bytes)}});
    }
    return doc;
}

void RunManifest::write(const std::filesystem::path &path) const {
    write_file(path, to_json().dump(2) + "\n");
}

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lcm
