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

// Undirected weighted communication graphs and the spectral helpers used by
// the consensus analysis.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qsdc::netgraph {

struct Edge {
  std::size_t lo = 0;  // smaller endpoint
  std::size_t hi = 0;  // larger endpoint
  double weight = 1.0;
};

struct Neighbor {
  std::size_t node = 0;
  double weight = 1.0;
};

// Validated, immutable simple graph. Edges keep insertion order; each is
// stored with its endpoints sorted.
class CommGraph {
 public:
  CommGraph() = default;

  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Neighbor>& neighbors(std::size_t i) const {
    return adjacency_list_.at(i);
  }
  double degree(std::size_t i) const;
  Eigen::MatrixXd adjacency() const;

  // Same topology with replaced per-edge weights (one per edge, in order).
  CommGraph with_weights(std::span<const double> weights) const;

  friend CommGraph build_graph(
      std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges,
      std::optional<std::span<const double>> weights);

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_list_;
};

// Throws ValidationError naming the offending edge on self-loops, duplicates,
// out-of-range endpoints or non-positive weights.
CommGraph build_graph(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges,
    std::optional<std::span<const double>> weights = std::nullopt);

CommGraph build_graph(std::size_t n,
                      const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                      const std::vector<double>& weights = {});

// n x m, column e has +1 at edges()[e].lo and -1 at edges()[e].hi.
Eigen::MatrixXd incidence_matrix(const CommGraph& g);

// Weighted Laplacian D - A.
Eigen::MatrixXd laplacian(const CommGraph& g);

bool is_connected(const CommGraph& g);

// Connected components as sorted node lists, ordered by smallest member.
std::vector<std::vector<std::size_t>> components(const CommGraph& g);

// Subgraph induced by `nodes` (re-indexed in the given order).
CommGraph induced_subgraph(const CommGraph& g, std::span<const std::size_t> nodes);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotation sweeps until the off-diagonal Frobenius norm drops
// below 1e-12 (scaled by the matrix norm) or 100 sweeps elapse. Rejects
// input that is not symmetric to within 1e-9.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& m);

double lambda_min_sym(const Eigen::MatrixXd& m);

struct SpectralReport {
  Eigen::MatrixXd laplacian;
  std::vector<double> eigenvalues;  // ascending
  bool connected = false;
  double algebraic_connectivity() const {
    return eigenvalues.size() > 1 ? eigenvalues[1] : 0.0;
  }
};

SpectralReport spectral_report(const CommGraph& g);

}  // namespace qsdc::netgraph
