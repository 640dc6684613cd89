// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qsdc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "qsdc/error.hpp"

namespace qsdc::scenario {
namespace {

using nlohmann::json;
using microgrid::Event;

constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::uint64_t as_uint(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  fail(path, "expected a non-negative integer");
}

const json& empty_object() {
  static const json kEmpty = json::object();
  return kEmpty;
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], index_path(path, i)));
  return out;
}

std::vector<std::size_t> as_indices(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of node indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(static_cast<std::size_t>(as_uint(j[i], index_path(path, i))));
  }
  return out;
}

// Reads keys from one JSON object and remembers which were consumed so that
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(const std::string& key) const { return path_ + "." + key; }

  // nullptr when absent or null.
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_->find(key);
    if (it == j_->end() || it->is_null()) return nullptr;
    return &*it;
  }
  bool present(const std::string& key) const { return j_->contains(key); }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(child(key), "required");
    return *v;
  }

  double number(const std::string& key) { return as_number(require(key), child(key)); }
  double number_or(const std::string& key, double def) {
    const json* v = find(key);
    return v ? as_number(*v, child(key)) : def;
  }
  std::optional<double> opt_number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_number(*v, child(key));
  }
  std::uint64_t uint_or(const std::string& key, std::uint64_t def) {
    const json* v = find(key);
    return v ? as_uint(*v, child(key)) : def;
  }
  std::optional<std::uint64_t> opt_uint(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_uint(*v, child(key));
  }
  bool bool_or(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(child(key), "expected true or false");
    return v->get<bool>();
  }
  std::string string(const std::string& key) {
    const json& v = require(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) fail(child(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!seen_.count(it.key())) fail(child(it.key()), "unknown key");
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Converts library validation messages into path-prefixed ones.
template <typename F>
void at_path(const std::string& path, F&& f) {
  try {
    f();
  } catch (const CapacityError& e) {
    throw CapacityError(path + ": " + e.what());
  } catch (const OutOfRegionError& e) {
    throw OutOfRegionError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  } catch (const PartitionError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

GraphSpec read_graph(const json& j, const std::string& path, std::optional<std::size_t> nodes) {
  ObjectReader r(j, path);
  GraphSpec g;
  if (nodes) {
    g.nodes = *nodes;
    if (const json* v = r.find("nodes")) {
      if (as_uint(*v, r.child("nodes")) != *nodes) {
        fail(r.child("nodes"), "must equal the number of DERs (" + std::to_string(*nodes) + ")");
      }
    }
  } else {
    g.nodes = static_cast<std::size_t>(as_uint(r.require("nodes"), r.child("nodes")));
    if (g.nodes == 0) fail(r.child("nodes"), "must be at least 1");
  }
  const json& edges = r.require("edges");
  if (!edges.is_array()) fail(r.child("edges"), "expected an array of [a, b] pairs");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto p = index_path(r.child("edges"), e);
    if (!edges[e].is_array() || edges[e].size() != 2) fail(p, "expected a pair [a, b]");
    g.edges.emplace_back(static_cast<std::size_t>(as_uint(edges[e][0], p + "[0]")),
                         static_cast<std::size_t>(as_uint(edges[e][1], p + "[1]")));
  }
  if (const json* w = r.find("weights")) {
    g.weights = as_numbers(*w, r.child("weights"));
    if (g.weights.size() != g.edges.size()) {
      fail(r.child("weights"), "expected one weight per edge (" + std::to_string(g.edges.size()) + ")");
    }
  }
  r.finish();
  at_path(path, [&] { (void)g.build(); });
  return g;
}

json write_graph(const GraphSpec& g, bool with_nodes) {
  json j = json::object();
  if (with_nodes) j["nodes"] = g.nodes;
  json edges = json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  j["edges"] = edges;
  if (!g.weights.empty()) j["weights"] = g.weights;
  return j;
}

consensus::ThetaDistribution read_theta(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind");
  consensus::ThetaDistribution d;
  if (kind == "uniform") {
    d = consensus::ThetaDistribution::uniform(r.number_or("lo", d.lo), r.number_or("hi", d.hi));
  } else if (kind == "fixed") {
    d = consensus::ThetaDistribution::fixed(r.number("value"));
  } else {
    fail(r.child("kind"), "expected \"uniform\" or \"fixed\"");
  }
  r.finish();
  return d;
}

json write_theta(const consensus::ThetaDistribution& d) {
  if (d.kind == consensus::ThetaDistribution::Kind::kFixed) {
    return {{"kind", "fixed"}, {"value", d.value}};
  }
  return {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
}

consensus::ProtocolConfig read_protocol(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  consensus::ProtocolConfig c;
  c.dt = r.number_or("dt", c.dt);
  const auto sub = r.uint_or("substeps", static_cast<std::uint64_t>(c.substeps));
  if (sub < 1 || sub > 1000) fail(r.child("substeps"), "must lie in [1, 1000]");
  c.substeps = static_cast<int>(sub);
  at_path(r.child("backend"), [&] { c.backend = consensus::parse_backend(r.string_or("backend", "phase")); });
  at_path(r.child("mode"), [&] { c.mode = consensus::parse_mode(r.string_or("mode", "qsdc")); });
  c.shots = r.opt_uint("shots");
  if (c.shots && *c.shots == 0) fail(r.child("shots"), "must be at least 1 (use null for exact mode)");
  if (const json* t = r.find("theta")) c.theta = read_theta(*t, r.child("theta"));
  r.finish();
  if (!(c.dt > 0.0 && c.dt <= 0.1)) fail(r.child("dt"), "must lie in (0, 0.1]");
  at_path(r.child("theta"), [&] { c.theta.validate(false); });
  return c;
}

json write_protocol(const consensus::ProtocolConfig& c) {
  json j = {{"dt", c.dt},
            {"substeps", c.substeps},
            {"backend", consensus::backend_name(c.backend)},
            {"mode", consensus::mode_name(c.mode)},
            {"theta", write_theta(c.theta)}};
  j["shots"] = c.shots ? json(*c.shots) : json(nullptr);
  return j;
}

std::vector<Event> read_events(const json& j, const std::string& path, Kind kind) {
  if (!j.is_array()) fail(path, "expected an array of events");
  std::vector<Event> out;
  for (std::size_t e = 0; e < j.size(); ++e) {
    ObjectReader r(j[e], index_path(path, e));
    Event ev;
    ev.time = r.number("time");
    at_path(r.child("kind"), [&] { ev.kind = microgrid::parse_event_kind(r.string("kind")); });
    if (const json* v = r.find("nodes")) ev.nodes = as_indices(*v, r.child("nodes"));
    const bool mixing = ev.kind == Event::Kind::kMixingOn || ev.kind == Event::Kind::kMixingOff;
    if (kind == Kind::kConsensus && !mixing) {
      fail(r.child("kind"), "consensus scenarios accept only mixing_on and mixing_off events");
    }
    if (ev.kind == Event::Kind::kStepLoad && kind == Kind::kDc) {
      if (!r.present("value")) fail(r.child("value"), "required (load resistance in ohm, null for no load)");
      const auto v = r.opt_number("value");
      ev.value = v ? *v : microgrid::kInfiniteLoad;
    } else if (ev.kind == Event::Kind::kStepLoad || ev.kind == Event::Kind::kDroopChange) {
      ev.value = r.number("value");
    }
    if (ev.kind == Event::Kind::kMixingOn) {
      ev.p = r.number("p");
      ev.probability = r.number_or("probability", 1.0);
    }
    r.finish();
    out.push_back(std::move(ev));
  }
  return out;
}

json write_events(const std::vector<Event>& events) {
  json arr = json::array();
  for (const auto& ev : events) {
    json j = {{"time", ev.time}, {"kind", microgrid::event_kind_name(ev.kind)}, {"nodes", ev.nodes}};
    if (ev.kind == Event::Kind::kStepLoad || ev.kind == Event::Kind::kDroopChange) {
      j["value"] = std::isinf(ev.value) ? json(nullptr) : json(ev.value);
    }
    if (ev.kind == Event::Kind::kMixingOn) {
      j["p"] = ev.p;
      j["probability"] = ev.probability;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

void check_node_indices(const std::vector<Event>& events, std::size_t n) {
  for (std::size_t e = 0; e < events.size(); ++e) {
    for (std::size_t k = 0; k < events[e].nodes.size(); ++k) {
      if (events[e].nodes[k] >= n) {
        fail("$.events[" + std::to_string(e) + "].nodes[" + std::to_string(k) + "]",
             "node index out of range (0.." + std::to_string(n - 1) + ")");
      }
    }
  }
}

std::vector<double> per_node(const json& j, const std::string& path, std::size_t n) {
  if (j.is_number()) return std::vector<double>(n, as_number(j, path));
  auto v = as_numbers(j, path);
  if (v.size() != n) fail(path, "expected " + std::to_string(n) + " values (one per node)");
  return v;
}

void read_consensus_nodes(ObjectReader& top, ScenarioFile& s) {
  ObjectReader r(top.require("nodes"), top.child("nodes"));
  const std::size_t n = s.graph.nodes;
  s.consensus.phi = per_node(r.require("phi"), r.child("phi"), n);
  s.consensus.pinner = per_node(r.require("pinner"), r.child("pinner"), n);
  if (const json* t = r.find("theta")) {
    s.consensus.theta = per_node(*t, r.child("theta"), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double th = s.consensus.theta[i];
      if (!(th > 0.0 && th < kPi)) fail(index_path(r.child("theta"), i), "must lie in (0, pi)");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double p = s.consensus.pinner[i];
    if (!(p >= 0.0 && p <= 0.5 * kPi)) {
      fail(index_path(r.child("pinner"), i), "must lie in [0, pi/2]");
    }
  }
  r.finish();
}

void read_ac(ObjectReader& top, ScenarioFile& s) {
  const json& ders = top.require("ders");
  const auto dpath = top.child("ders");
  if (!ders.is_array() || ders.empty()) fail(dpath, "expected a non-empty array of DER objects");
  const std::size_t n = ders.size();
  auto& sys = s.ac;
  sys.ders.clear();
  sys.network.loads.clear();
  sys.network.group.clear();
  for (std::size_t i = 0; i < n; ++i) {
    ObjectReader r(ders[i], index_path(dpath, i));
    microgrid::AcDer d;
    d.droop = r.number("droop");
    d.rated = r.number_or("rated", 60.0);
    d.delta = r.number_or("delta", 0.0);
    d.online = r.bool_or("online", true);
    if (!(d.droop > 0.0)) fail(r.child("droop"), "must be positive");
    if (!(d.rated > 0.0)) fail(r.child("rated"), "must be positive");
    const double load = r.number_or("load", 20.0);
    if (!(load >= 0.0)) fail(r.child("load"), "must be non-negative");
    sys.network.loads.push_back(load);
    sys.network.group.push_back(static_cast<std::size_t>(r.uint_or("group", i)));
    sys.ders.push_back(d);
    r.finish();
  }
  s.graph = read_graph(top.require("graph"), top.child("graph"), n);
  if (const json* c = top.find("comm")) {
    s.comm = read_graph(*c, top.child("comm"), n);
  } else {
    s.comm = GraphSpec{n, s.graph.edges, {}};
  }
  const json* ac = top.find("ac");
  ObjectReader r(ac ? *ac : empty_object(), top.child("ac"));
  sys.network.omega_star = r.number_or("omega_star", 60.0);
  sys.network.nominal_voltage = r.number_or("nominal_voltage", 380.0);
  sys.network.k = r.number_or("k", microgrid::recommended_k(sys.ders));
  if (!(sys.network.k > 0.0)) fail(r.child("k"), "must be positive");
  r.finish();
}

void read_dc(ObjectReader& top, ScenarioFile& s) {
  const json& ders = top.require("ders");
  const auto dpath = top.child("ders");
  if (!ders.is_array() || ders.empty()) fail(dpath, "expected a non-empty array of DER objects");
  const std::size_t n = ders.size();
  auto& sys = s.dc;
  sys.ders.clear();
  for (std::size_t i = 0; i < n; ++i) {
    ObjectReader r(ders[i], index_path(dpath, i));
    microgrid::DcDer d;
    d.droop = r.number("droop");
    d.resistance = r.number_or("resistance", 0.1);
    d.rated_current = r.number_or("rated_current", 5.0);
    d.online = r.bool_or("online", true);
    if (!(d.droop > 0.0)) fail(r.child("droop"), "must be positive");
    if (!(d.resistance > 0.0)) fail(r.child("resistance"), "must be positive");
    if (!(d.rated_current > 0.0)) fail(r.child("rated_current"), "must be positive");
    sys.ders.push_back(d);
    r.finish();
  }
  s.graph = read_graph(top.require("graph"), top.child("graph"), n);
  const json* dc = top.find("dc");
  ObjectReader r(dc ? *dc : empty_object(), top.child("dc"));
  sys.network.v_star = r.number_or("v_star", 48.0);
  const auto rl = r.opt_number("load_resistance");
  sys.network.load_resistance = rl ? *rl : microgrid::kInfiniteLoad;
  if (!(sys.network.load_resistance > 0.0)) {
    fail(r.child("load_resistance"), "must be positive (null for no load)");
  }
  sys.network.c = r.number_or("c", microgrid::recommended_c(sys.ders));
  if (!(sys.network.c > 0.0)) fail(r.child("c"), "must be positive");
  r.finish();
}

void read_eve(ObjectReader& top, ScenarioFile& s) {
  ObjectReader r(top.require("eve"), top.child("eve"));
  auto& e = s.eve;
  e.phi = r.number("phi");
  if (!(e.phi >= 0.0 && e.phi <= 0.5 * kPi)) fail(r.child("phi"), "must lie in [0, pi/2]");
  if (const json* t = r.find("theta")) e.theta = read_theta(*t, r.child("theta"));
  at_path(r.child("theta"), [&] { e.theta.validate(true); });
  e.steps = r.uint_or("steps", e.steps);
  if (e.steps == 0) fail(r.child("steps"), "must be at least 1");
  e.shots_per_step = r.uint_or("shots_per_step", e.shots_per_step);
  if (e.shots_per_step == 0) fail(r.child("shots_per_step"), "must be at least 1");
  const auto policy = r.string_or("policy", "all");
  if (policy == "all") {
    e.policy = measurement::BasesPolicy::kAll;
  } else if (policy == "round_robin") {
    e.policy = measurement::BasesPolicy::kRoundRobin;
  } else {
    fail(r.child("policy"), "expected \"all\" or \"round_robin\"");
  }
  e.gate_level = r.bool_or("gate_level", false);
  r.finish();
}

void check_scaling_ac(const ScenarioFile& s) {
  double worst = 0.0;
  for (const auto& d : s.ac.ders) worst = std::max(worst, d.droop * d.rated);
  for (const auto& ev : s.events) {
    if (ev.kind != Event::Kind::kDroopChange) continue;
    for (auto i : ev.nodes) worst = std::max(worst, ev.value * s.ac.ders[i].rated);
  }
  const double prod = s.ac.network.k * worst;
  if (prod >= 0.5 * kPi) {
    std::ostringstream os;
    os << "scaling rule violated: k * max(n_i * rated_i) = " << prod
       << " must stay below pi/2 so every pinner stays in [0, pi/2]; reduce k below "
       << 0.5 * kPi / worst << " (recommended " << 0.8 * 0.5 * kPi / worst << ")";
    fail("$.ac.k", os.str());
  }
}

void check_scaling_dc(const ScenarioFile& s) {
  double worst = 0.0;
  for (const auto& d : s.dc.ders) worst = std::max(worst, d.droop * d.rated_current);
  for (const auto& ev : s.events) {
    if (ev.kind != Event::Kind::kDroopChange) continue;
    for (auto i : ev.nodes) worst = std::max(worst, ev.value * s.dc.ders[i].rated_current);
  }
  const double prod = s.dc.network.c * worst;
  if (prod >= 0.5 * kPi) {
    std::ostringstream os;
    os << "scaling rule violated: c * max(m_i * I_rated) = " << prod
       << " must stay below pi/2 so every pinner stays in [0, pi/2]; reduce c below "
       << 0.5 * kPi / worst << " (recommended " << 0.8 * 0.5 * kPi / worst << ")";
    fail("$.dc.c", os.str());
  }
}

}  // namespace

netgraph::CommGraph GraphSpec::build() const { return netgraph::build_graph(nodes, edges, weights); }

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kConsensus: return "consensus";
    case Kind::kAc: return "ac";
    case Kind::kDc: return "dc";
    case Kind::kEve: return "eve";
    case Kind::kRate: return "rate";
  }
  return "?";
}

Kind parse_kind(const std::string& s) {
  for (auto k : {Kind::kConsensus, Kind::kAc, Kind::kDc, Kind::kEve, Kind::kRate}) {
    if (s == kind_name(k)) return k;
  }
  throw ValidationError("unknown kind '" + s + "' (expected consensus|ac|dc|eve|rate)");
}

const char* format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::kCsv: return "csv";
    case OutputFormat::kJson: return "json";
    case OutputFormat::kBoth: return "both";
  }
  return "?";
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::kCsv;
  if (s == "json") return OutputFormat::kJson;
  if (s == "both") return OutputFormat::kBoth;
  throw ValidationError("unknown format '" + s + "' (expected csv|json|both)");
}

std::string ScenarioFile::output_prefix() const {
  return outputs.prefix.empty() ? std::string(kind_name(kind)) : outputs.prefix;
}

ScenarioFile parse_scenario(const nlohmann::json& doc) {
  ObjectReader top(doc, "$");
  ScenarioFile s;
  const auto version = top.uint_or("schema_version", kSchemaVersion);
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    fail(top.child("schema_version"), "unsupported version " + std::to_string(version) +
                                          " (this build reads version " +
                                          std::to_string(kSchemaVersion) + ")");
  }
  at_path(top.child("kind"), [&] { s.kind = parse_kind(top.string("kind")); });
  s.description = top.string_or("description", "");
  s.seed = top.opt_uint("seed");
  s.horizon = top.number_or("horizon", s.horizon);
  if (!(s.horizon > 0.0)) fail(top.child("horizon"), "must be positive");
  if (const json* p = top.find("protocol")) s.protocol = read_protocol(*p, top.child("protocol"));

  switch (s.kind) {
    case Kind::kConsensus:
      s.graph = read_graph(top.require("graph"), top.child("graph"), std::nullopt);
      read_consensus_nodes(top, s);
      break;
    case Kind::kRate:
      s.graph = read_graph(top.require("graph"), top.child("graph"), std::nullopt);
      if (const json* r = top.find("rate")) {
        ObjectReader rr(*r, top.child("rate"));
        s.epsilon = rr.opt_number("epsilon");
        rr.finish();
      }
      break;
    case Kind::kAc: read_ac(top, s); break;
    case Kind::kDc: read_dc(top, s); break;
    case Kind::kEve: read_eve(top, s); break;
  }

  if (const json* ev = top.find("events")) {
    if (s.kind == Kind::kEve || s.kind == Kind::kRate) {
      fail(top.child("events"), std::string("not used by kind ") + kind_name(s.kind));
    }
    s.events = read_events(*ev, top.child("events"), s.kind);
  }
  if (const json* o = top.find("outputs")) {
    ObjectReader r(*o, top.child("outputs"));
    at_path(r.child("format"), [&] { s.outputs.format = parse_format(r.string_or("format", "both")); });
    s.outputs.prefix = r.string_or("prefix", "");
    if (s.outputs.prefix.find_first_of("/\\") != std::string::npos) {
      fail(r.child("prefix"), "must be a plain file-name prefix");
    }
    r.finish();
  }
  top.finish();
  validate(s);
  return s;
}

ScenarioFile parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("$: malformed JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario_text(ss.str());
  } catch (const CapacityError& e) {
    throw CapacityError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void validate(const ScenarioFile& s) {
  at_path("$.protocol", [&] { s.protocol.validate(); });
  switch (s.kind) {
    case Kind::kConsensus: {
      const std::size_t n = s.graph.nodes;
      if (s.consensus.phi.size() != n || s.consensus.pinner.size() != n) {
        fail("$.nodes", "phi and pinner need one value per node");
      }
      if (!s.consensus.theta.empty() && s.consensus.theta.size() != n) {
        fail("$.nodes.theta", "needs one value per node");
      }
      if (s.protocol.backend == consensus::Backend::kFull && n > quantum::kMaxDenseQubits) {
        throw CapacityError("$.protocol.backend: the full backend holds at most " +
                            std::to_string(quantum::kMaxDenseQubits) + " nodes, this graph has " +
                            std::to_string(n) + "; use \"bloch\" or \"phase\"");
      }
      check_node_indices(s.events, n);
      at_path("$.events", [&] { (void)microgrid::mixing_windows(s.events, s.horizon); });
      for (std::size_t e = 0; e < s.events.size(); ++e) {
        const auto& ev = s.events[e];
        if (!(ev.time >= 0.0 && ev.time <= s.horizon)) {
          fail("$.events[" + std::to_string(e) + "].time", "must lie within [0, horizon]");
        }
      }
      break;
    }
    case Kind::kRate:
      if (s.epsilon && !(*s.epsilon >= 0.0)) fail("$.rate.epsilon", "must be non-negative");
      break;
    case Kind::kAc: {
      const std::size_t n = s.ac.ders.size();
      check_node_indices(s.events, n);
      check_scaling_ac(s);
      if (s.protocol.backend == consensus::Backend::kFull && n > quantum::kMaxDenseQubits) {
        throw CapacityError("$.protocol.backend: the full backend holds at most " +
                            std::to_string(quantum::kMaxDenseQubits) + " DERs; use \"bloch\" or \"phase\"");
      }
      at_path("$", [&] { microgrid::validate(ac_system(s)); });
      break;
    }
    case Kind::kDc: {
      const std::size_t n = s.dc.ders.size();
      check_node_indices(s.events, n);
      check_scaling_dc(s);
      if (s.protocol.backend == consensus::Backend::kFull && n > quantum::kMaxDenseQubits) {
        throw CapacityError("$.protocol.backend: the full backend holds at most " +
                            std::to_string(quantum::kMaxDenseQubits) + " DERs; use \"bloch\" or \"phase\"");
      }
      at_path("$", [&] { microgrid::validate(dc_system(s)); });
      break;
    }
    case Kind::kEve:
      at_path("$.eve.theta", [&] { s.eve.theta.validate(true); });
      break;
  }
}

microgrid::AcSystem ac_system(const ScenarioFile& s) {
  microgrid::AcSystem sys = s.ac;
  sys.network.electrical = s.graph.build();
  sys.network.comm = s.comm.edges.empty() && s.comm.nodes == 0
                         ? netgraph::build_graph(s.graph.nodes, s.graph.edges)
                         : s.comm.build();
  sys.events = s.events;
  sys.horizon = s.horizon;
  return sys;
}

microgrid::DcSystem dc_system(const ScenarioFile& s) {
  microgrid::DcSystem sys = s.dc;
  sys.network.comm = s.graph.build();
  sys.events = s.events;
  sys.horizon = s.horizon;
  return sys;
}

std::vector<consensus::MixingEvent> consensus_mixing(const ScenarioFile& s) {
  return microgrid::mixing_windows(s.events, s.horizon);
}

double initial_deviation(const ScenarioFile& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.consensus.phi.size(); ++i) {
    m = std::max(m, std::abs(s.consensus.phi[i] - s.consensus.pinner[i]));
  }
  return m;
}

nlohmann::json serialize(const ScenarioFile& s) {
  json j;
  j["schema_version"] = s.schema_version;
  j["kind"] = kind_name(s.kind);
  if (!s.description.empty()) j["description"] = s.description;
  j["seed"] = s.seed ? json(*s.seed) : json(nullptr);
  j["horizon"] = s.horizon;
  j["protocol"] = write_protocol(s.protocol);
  switch (s.kind) {
    case Kind::kConsensus:
      j["graph"] = write_graph(s.graph, true);
      j["nodes"] = {{"phi", s.consensus.phi}, {"pinner", s.consensus.pinner}};
      if (!s.consensus.theta.empty()) j["nodes"]["theta"] = s.consensus.theta;
      break;
    case Kind::kRate:
      j["graph"] = write_graph(s.graph, true);
      if (s.epsilon) j["rate"] = {{"epsilon", *s.epsilon}};
      break;
    case Kind::kAc: {
      j["graph"] = write_graph(s.graph, true);
      j["comm"] = write_graph(s.comm, false);
      json ders = json::array();
      for (std::size_t i = 0; i < s.ac.ders.size(); ++i) {
        const auto& d = s.ac.ders[i];
        ders.push_back({{"droop", d.droop},
                        {"rated", d.rated},
                        {"load", s.ac.network.loads[i]},
                        {"group", s.ac.network.group[i]},
                        {"delta", d.delta},
                        {"online", d.online}});
      }
      j["ders"] = ders;
      j["ac"] = {{"omega_star", s.ac.network.omega_star},
                 {"nominal_voltage", s.ac.network.nominal_voltage},
                 {"k", s.ac.network.k}};
      break;
    }
    case Kind::kDc: {
      j["graph"] = write_graph(s.graph, true);
      json ders = json::array();
      for (const auto& d : s.dc.ders) {
        ders.push_back({{"droop", d.droop},
                        {"resistance", d.resistance},
                        {"rated_current", d.rated_current},
                        {"online", d.online}});
      }
      j["ders"] = ders;
      j["dc"] = {{"v_star", s.dc.network.v_star}, {"c", s.dc.network.c}};
      j["dc"]["load_resistance"] = std::isinf(s.dc.network.load_resistance)
                                       ? json(nullptr)
                                       : json(s.dc.network.load_resistance);
      break;
    }
    case Kind::kEve:
      j["eve"] = {{"phi", s.eve.phi},
                  {"theta", write_theta(s.eve.theta)},
                  {"steps", s.eve.steps},
                  {"shots_per_step", s.eve.shots_per_step},
                  {"policy", s.eve.policy == measurement::BasesPolicy::kAll ? "all" : "round_robin"},
                  {"gate_level", s.eve.gate_level}};
      break;
  }
  if (s.kind != Kind::kEve && s.kind != Kind::kRate) j["events"] = write_events(s.events);
  j["outputs"] = {{"format", format_name(s.outputs.format)}, {"prefix", s.outputs.prefix}};
  return j;
}

}  // namespace qsdc::scenario
