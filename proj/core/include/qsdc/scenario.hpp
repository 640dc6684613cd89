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

#pragma once

// Scenario files: JSON documents describing one run of any subcommand.
// Parsing applies defaults, rejects unknown keys and reports errors with the
// JSON path of the offending value ("$.protocol.dt: ...").

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsdc/consensus.hpp"
#include "qsdc/measurement.hpp"
#include "qsdc/microgrid.hpp"

namespace qsdc::scenario {

inline constexpr int kSchemaVersion = 1;

enum class Kind { kConsensus, kAc, kDc, kEve, kRate };

const char* kind_name(Kind k);
Kind parse_kind(const std::string& s);

struct GraphSpec {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> weights;  // empty means unit weights

  netgraph::CommGraph build() const;
};

struct ConsensusSpec {
  std::vector<double> phi;
  std::vector<double> theta;   // optional first-step polar angles
  std::vector<double> pinner;  // one per node
};

struct EveSpec {
  double phi = 0.0;
  consensus::ThetaDistribution theta = consensus::ThetaDistribution::uniform(0.0, 3.141592653589793);
  std::uint64_t steps = 2000;  // intercepted qubits, each with a fresh theta
  std::uint64_t shots_per_step = 1;
  measurement::BasesPolicy policy = measurement::BasesPolicy::kAll;
  bool gate_level = false;
};

enum class OutputFormat { kCsv, kJson, kBoth };

const char* format_name(OutputFormat f);
OutputFormat parse_format(const std::string& s);

struct OutputSpec {
  OutputFormat format = OutputFormat::kBoth;
  std::string prefix;  // defaults to the kind name
};

struct ScenarioFile {
  int schema_version = kSchemaVersion;
  Kind kind = Kind::kConsensus;
  std::string description;
  std::optional<std::uint64_t> seed;
  double horizon = 10.0;

  GraphSpec graph;  // consensus / rate / eve: protocol graph; AC: electrical; DC: communication
  GraphSpec comm;   // AC only; empty edge list means "same as graph, unit rates"
  consensus::ProtocolConfig protocol;
  std::vector<microgrid::Event> events;

  ConsensusSpec consensus;
  // Per-DER data and plant constants; graphs, events and horizon live in the
  // top-level fields and are merged by ac_system() / dc_system().
  microgrid::AcSystem ac;
  microgrid::DcSystem dc;
  EveSpec eve;
  std::optional<double> epsilon;  // rate
  OutputSpec outputs;

  std::string output_prefix() const;
};

// Throws ValidationError with a JSON-path message on any schema or physics
// violation.
ScenarioFile parse_scenario(const nlohmann::json& doc);
ScenarioFile parse_scenario_text(const std::string& text);
ScenarioFile load_scenario(const std::filesystem::path& path);

nlohmann::json serialize(const ScenarioFile& s);

// Re-runs the physics checks after command-line overrides.
void validate(const ScenarioFile& s);

microgrid::AcSystem ac_system(const ScenarioFile& s);
microgrid::DcSystem dc_system(const ScenarioFile& s);

// Consensus-kind helpers.
std::vector<consensus::MixingEvent> consensus_mixing(const ScenarioFile& s);
// Largest initial |phi_i - pinner_i|; 0 for kinds without initial phases.
double initial_deviation(const ScenarioFile& s);

}  // namespace qsdc::scenario
