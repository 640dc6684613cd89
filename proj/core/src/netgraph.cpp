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

#include "qsdc/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "qsdc/error.hpp"

namespace qsdc::netgraph {
namespace {

std::string edge_name(std::size_t index, std::size_t a, std::size_t b) {
  std::ostringstream os;
  os << "edge #" << index << " (" << a << ", " << b << ")";
  return os.str();
}

}  // namespace

CommGraph build_graph(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges,
    std::optional<std::span<const double>> weights) {
  if (n == 0) throw ValidationError("graph must have at least one node");
  if (weights && weights->size() != edges.size()) {
    std::ostringstream os;
    os << "weights length " << weights->size() << " does not match "
       << edges.size() << " edges";
    throw ValidationError(os.str());
  }

  CommGraph g;
  g.node_count_ = n;
  g.adjacency_list_.resize(n);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [a, b] = edges[e];
    if (a >= n || b >= n) {
      throw ValidationError(edge_name(e, a, b) + ": node index out of range for " +
                            std::to_string(n) + " nodes");
    }
    if (a == b) throw ValidationError(edge_name(e, a, b) + ": self-loop");
    const double w = weights ? (*weights)[e] : 1.0;
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError(edge_name(e, a, b) + ": weight must be positive");
    }
    const auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) {
      throw ValidationError(edge_name(e, a, b) + ": duplicate edge");
    }
    g.edges_.push_back({key.first, key.second, w});
    g.adjacency_list_[a].push_back({b, w});
    g.adjacency_list_[b].push_back({a, w});
  }
  return g;
}

CommGraph build_graph(std::size_t n,
                      const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                      const std::vector<double>& weights) {
  if (weights.empty()) {
    return build_graph(n, std::span(edges), std::nullopt);
  }
  return build_graph(n, std::span(edges), std::span<const double>(weights));
}

double CommGraph::degree(std::size_t i) const {
  double d = 0.0;
  for (const auto& nb : adjacency_list_.at(i)) d += nb.weight;
  return d;
}

Eigen::MatrixXd CommGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(node_count_);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges_) {
    a(e.lo, e.hi) = e.weight;
    a(e.hi, e.lo) = e.weight;
  }
  return a;
}

CommGraph CommGraph::with_weights(std::span<const double> weights) const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(edges_.size());
  for (const auto& e : edges_) pairs.emplace_back(e.lo, e.hi);
  return build_graph(node_count_, std::span(pairs), weights);
}

Eigen::MatrixXd incidence_matrix(const CommGraph& g) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(g.node_count()),
      static_cast<Eigen::Index>(g.edge_count()));
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& edge = g.edges()[e];
    b(edge.lo, e) = 1.0;
    b(edge.hi, e) = -1.0;
  }
  return b;
}

Eigen::MatrixXd laplacian(const CommGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    l(e.lo, e.lo) += e.weight;
    l(e.hi, e.hi) += e.weight;
    l(e.lo, e.hi) -= e.weight;
    l(e.hi, e.lo) -= e.weight;
  }
  return l;
}

std::vector<std::vector<std::size_t>> components(const CommGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (const auto& nb : g.neighbors(v)) {
        if (!seen[nb.node]) {
          seen[nb.node] = true;
          queue.push_back(nb.node);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

bool is_connected(const CommGraph& g) { return components(g).size() == 1; }

CommGraph induced_subgraph(const CommGraph& g, std::span<const std::size_t> nodes) {
  std::vector<std::size_t> index(g.node_count(), g.node_count());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] >= g.node_count()) {
      throw ValidationError("induced_subgraph: node " + std::to_string(nodes[k]) +
                            " out of range");
    }
    index[nodes[k]] = k;
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> weights;
  for (const auto& e : g.edges()) {
    if (index[e.lo] < nodes.size() && index[e.hi] < nodes.size()) {
      pairs.emplace_back(index[e.lo], index[e.hi]);
      weights.push_back(e.weight);
    }
  }
  return build_graph(nodes.size(), pairs, weights);
}

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ValidationError("jacobi_eigen: matrix not square");
  const Eigen::Index n = m.rows();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("jacobi_eigen: matrix not symmetric within 1e-9");
  }

  Eigen::MatrixXd a = 0.5 * (m + m.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double tol = 1e-12 * std::max(1.0, a.norm());

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q)
        if (p != q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < 100 && off_norm() >= tol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rutishauser's stable rotation.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values.push_back(a(order[k], order[k]));
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double lambda_min_sym(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) throw ValidationError("lambda_min_sym: empty matrix");
  return jacobi_eigen(m).values.front();
}

SpectralReport spectral_report(const CommGraph& g) {
  SpectralReport r;
  r.laplacian = laplacian(g);
  r.eigenvalues = jacobi_eigen(r.laplacian).values;
  r.connected = is_connected(g);
  return r;
}

}  // namespace qsdc::netgraph
