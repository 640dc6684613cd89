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

#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "qsdc/consensus.hpp"
#include "qsdc/error.hpp"
#include "qsdc/measurement.hpp"
#include "qsdc/microgrid.hpp"
#include "qsdc/report.hpp"
#include "qsdc/scenario.hpp"

namespace qsdc::cli {
namespace {

namespace fs = std::filesystem;
using scenario::Kind;
using scenario::OutputFormat;
using scenario::ScenarioFile;

struct Flags {
  std::string scenario;
  std::string backend;
  std::string mode;
  std::optional<std::uint64_t> shots;
  bool exact = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::string out = ".";
  std::string format;
  std::optional<double> epsilon;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

class Outputs {
 public:
  Outputs(const ScenarioFile& s, const Flags& flags, const Environment& env)
      : format_(s.outputs.format), prefix_(s.output_prefix()) {
    dir_ = env.out_dir ? fs::path(*env.out_dir) : fs::path(flags.out);
    if (!flags.format.empty()) format_ = scenario::parse_format(flags.format);
  }

  bool csv() const { return format_ != OutputFormat::kJson; }
  bool json() const { return format_ != OutputFormat::kCsv; }

  fs::path write(const std::string& suffix, const std::string& text) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw RuntimeFailure("cannot create output directory '" + dir_.string() + "'");
    const auto path = dir_ / (prefix_ + suffix);
    write_file(path, text);
    written_.push_back(path.string());
    return path;
  }

  std::string listing() const {
    std::string s;
    for (const auto& w : written_) s += (s.empty() ? "" : ", ") + w;
    return s.empty() ? "no files" : s;
  }

 private:
  OutputFormat format_;
  std::string prefix_;
  fs::path dir_;
  std::vector<std::string> written_;
};

ScenarioFile load(const Flags& flags, Kind expected, bool allow_consensus = false) {
  if (flags.scenario.empty()) throw ValidationError("--scenario is required");
  auto s = scenario::load_scenario(flags.scenario);
  if (s.kind != expected && !(allow_consensus && s.kind == Kind::kConsensus)) {
    throw ValidationError(flags.scenario + ": scenario kind is '" + scenario::kind_name(s.kind) +
                          "', this subcommand needs '" + scenario::kind_name(expected) + "'");
  }
  if (!flags.backend.empty()) s.protocol.backend = consensus::parse_backend(flags.backend);
  if (!flags.mode.empty()) s.protocol.mode = consensus::parse_mode(flags.mode);
  if (flags.exact) s.protocol.shots.reset();
  if (flags.shots) {
    if (*flags.shots == 0) throw ValidationError("--shots must be at least 1");
    if (s.kind == Kind::kEve) {
      s.eve.steps = *flags.shots;
    } else {
      s.protocol.shots = *flags.shots;
    }
  }
  if (flags.seed) s.seed = *flags.seed;
  if (flags.dt) s.protocol.dt = *flags.dt;
  scenario::validate(s);
  return s;
}

std::uint64_t require_seed(const ScenarioFile& s) {
  if (!s.seed) {
    throw ValidationError("a seed is required: set \"seed\" in the scenario or pass --seed");
  }
  return *s.seed;
}

int run_consensus_cmd(const Flags& flags, const Environment& env, std::ostream& out) {
  auto s = load(flags, Kind::kConsensus);
  auto cfg = s.protocol;
  cfg.seed = require_seed(s);
  const auto g = s.graph.build();
  const auto mixing = scenario::consensus_mixing(s);
  consensus::RunOptions opts;
  if (!s.consensus.theta.empty()) opts.initial_thetas = s.consensus.theta;
  const auto tr = consensus::run_consensus(s.consensus.phi,
                                           consensus::constant_pinners(s.consensus.pinner), g,
                                           cfg, s.horizon, mixing, opts);
  const double eps = scenario::initial_deviation(s);
  std::optional<double> mu;
  if (eps < 0.5 * std::numbers::pi) mu = consensus::convergence_rate(g, eps);
  const auto summary = report::summarize(tr, mu, eps);

  Outputs o(s, flags, env);
  if (o.csv()) o.write(".csv", report::consensus_csv(tr));
  if (o.json()) o.write("_summary.json", report::dump(summary));
  out << "consensus: " << tr.node_count() << " nodes, backend " << consensus::backend_name(cfg.backend)
      << ", mode " << consensus::mode_name(cfg.mode) << ", max final error "
      << report::format_number(summary["max_final_error"].get<double>());
  if (!summary["fitted_rate"].is_null()) {
    out << ", fitted rate " << fixed(summary["fitted_rate"].get<double>(), 4);
  }
  if (mu) out << ", 2mu " << fixed(2.0 * *mu, 4);
  out << "; wrote " << o.listing() << "\n";
  return kOk;
}

int run_plant_cmd(const Flags& flags, const Environment& env, std::ostream& out, Kind kind) {
  auto s = load(flags, kind);
  auto cfg = s.protocol;
  cfg.seed = require_seed(s);
  const auto ts = kind == Kind::kAc ? microgrid::run_ac(scenario::ac_system(s), cfg)
                                    : microgrid::run_dc(scenario::dc_system(s), cfg);
  const auto summary = report::summarize(ts);
  Outputs o(s, flags, env);
  if (o.csv()) o.write(".csv", report::timeseries_csv(ts));
  if (o.json()) o.write("_summary.json", report::dump(summary));
  out << scenario::kind_name(kind) << ": " << ts.der_count << " DERs, ";
  if (kind == Kind::kAc) {
    out << "steady frequency " << fixed(summary["steady_freq_hz"].get<double>(), 6) << " Hz";
  } else {
    out << "steady bus voltage " << fixed(summary["steady_vbus_v"].get<double>(), 6) << " V";
  }
  out << ", sharing spread " << report::format_number(summary["sharing_spread_pct"].is_null()
                                                          ? std::nan("")
                                                          : summary["sharing_spread_pct"].get<double>())
      << "%; wrote " << o.listing() << "\n";
  return kOk;
}

int run_eve_cmd(const Flags& flags, const Environment& env, std::ostream& out) {
  auto s = load(flags, Kind::kEve);
  const auto& e = s.eve;
  const bool exact = flags.exact;
  const std::uint64_t seed = require_seed(s);
  std::vector<quantum::BlochVector> stream;
  stream.reserve(e.steps);
  for (std::uint64_t k = 0; k < e.steps; ++k) {
    stream.push_back(quantum::BlochVector::from_polar(1.0, e.theta.sample(seed, 0, k), e.phi));
  }
  const auto rep = exact ? measurement::eve_expected(stream)
                         : measurement::eve_intercept(stream, e.policy, e.shots_per_step, 0, seed);
  auto j = measurement::to_json(rep);
  const double x_limit = e.theta.mean_sin() * std::cos(e.phi);
  j["phi_true"] = e.phi;
  j["naive_bias"] = rep.naive_phi - e.phi;
  j["shots_per_step"] = e.shots_per_step;
  j["closed_form"] = {{"mean_sin_theta", e.theta.mean_sin()},
                      {"x_expectation", x_limit},
                      {"naive_phi", std::acos(x_limit)}};
  const auto& z = rep.counts[static_cast<std::size_t>(measurement::Basis::Z)];
  if (!exact && z.shots() > 0) {
    j["z_binomial_p_value"] = measurement::binomial_test_two_sided(z.zeros, z.shots(), 0.5);
  }
  Outputs o(s, flags, env);
  if (o.csv()) o.write("_eve.csv", report::eve_csv(rep));
  if (o.json()) o.write("_eve.json", report::dump(j));
  out << "eve: naive_phi " << fixed(rep.naive_phi, 4) << " (true " << fixed(e.phi, 4)
      << "), informed_phi " << fixed(rep.informed_phi, 4) << ", Z entropy "
      << fixed(rep.entropy_bits[2], 4) << " bits; wrote " << o.listing() << "\n";
  return kOk;
}

int run_rate_cmd(const Flags& flags, const Environment& env, std::ostream& out) {
  auto s = load(flags, Kind::kRate, true);
  double eps = 0.0;
  if (flags.epsilon) {
    eps = *flags.epsilon;
  } else if (s.epsilon) {
    eps = *s.epsilon;
  } else if (s.kind == Kind::kConsensus) {
    eps = scenario::initial_deviation(s);
  }
  const auto g = s.graph.build();
  const double mu = consensus::convergence_rate(g, eps);
  const auto spec = netgraph::spectral_report(g);
  nlohmann::json j = {{"epsilon", eps},
                      {"sigma1", consensus::sinc(eps)},
                      {"sigma2", consensus::sinc(2.0 * eps)},
                      {"mu", mu},
                      {"laplacian_eigenvalues", spec.eigenvalues},
                      {"algebraic_connectivity", spec.algebraic_connectivity()},
                      {"connected", spec.connected}};
  Outputs o(s, flags, env);
  if (o.json()) o.write("_rate.json", report::dump(j));
  out << "mu = " << fixed(mu, 4) << " (epsilon " << fixed(eps, 4) << ")";
  if (o.json()) out << "; wrote " << o.listing();
  out << "\n";
  return kOk;
}

void add_flags(CLI::App* sub, Flags& f, bool with_epsilon) {
  sub->add_option("--scenario", f.scenario, "Scenario JSON file")->required();
  sub->add_option("--backend", f.backend, "Evolution backend")
      ->check(CLI::IsMember({"full", "bloch", "phase"}));
  sub->add_option("--mode", f.mode, "Protocol variant")->check(CLI::IsMember({"qsdc", "qdc_legacy"}));
  auto* shots = sub->add_option("--shots", f.shots, "Shots per measurement (sampling mode)");
  auto* exact = sub->add_flag("--exact", f.exact, "Use exact expectations instead of shots");
  shots->excludes(exact);
  sub->add_option("--seed", f.seed, "Master seed (overrides the scenario)");
  sub->add_option("--dt", f.dt, "Protocol step size");
  sub->add_option("--out", f.out, "Output directory (QSDC_OUT_DIR wins)");
  sub->add_option("--format", f.format, "Output files")->check(CLI::IsMember({"csv", "json", "both"}));
  if (with_epsilon) sub->add_option("--epsilon", f.epsilon, "Initial deviation bound in rad");
}

}  // namespace

Environment environment_from_process() {
  Environment env;
  if (const char* d = std::getenv("QSDC_OUT_DIR"); d && *d) env.out_dir = d;
  return env;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const Environment& env) {
  CLI::App app{"Secure quantum phase-consensus simulator"};
  app.name("qsdc");
  app.require_subcommand(1);
  Flags flags;
  auto* c = app.add_subcommand("consensus", "Run the phase-consensus protocol on a graph");
  auto* ac = app.add_subcommand("ac", "AC microgrid frequency regulation");
  auto* dc = app.add_subcommand("dc", "DC microgrid voltage regulation");
  auto* eve = app.add_subcommand("eve", "Intercept-and-measure eavesdropper statistics");
  auto* rate = app.add_subcommand("rate", "Guaranteed convergence rate of a graph");
  for (auto* sub : {c, ac, dc, eve}) add_flags(sub, flags, false);
  add_flags(rate, flags, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (c->parsed()) return run_consensus_cmd(flags, env, out);
    if (ac->parsed()) return run_plant_cmd(flags, env, out, Kind::kAc);
    if (dc->parsed()) return run_plant_cmd(flags, env, out, Kind::kDc);
    if (eve->parsed()) return run_eve_cmd(flags, env, out);
    if (rate->parsed()) return run_rate_cmd(flags, env, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const RuntimeFailure& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kRuntime;
  }
  return kValidation;
}

}  // namespace qsdc::cli
