#include "gridmarket/grid_model.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace gridmarket {

PowerNetwork build_network(const std::vector<BusRecord>& buses,
                           const std::vector<EdgeRecord>& lines) {
  const int n = static_cast<int>(buses.size());
  if (n < 2) throw std::invalid_argument("build_network: need at least 2 buses");
  const int m = static_cast<int>(lines.size());

  PowerNetwork net;
  net.n = n;
  net.m = m;
  net.V.resize(n);
  net.M.resize(n);
  net.A.resize(n);
  net.Pd.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& b = buses[i];
    if (b.id != i + 1)
      throw std::invalid_argument("build_network: bus ids must be 1..n in order, got " +
                                  std::to_string(b.id) + " at position " + std::to_string(i + 1));
    if (b.M <= 0.0) throw std::invalid_argument("build_network: nonpositive inertia at bus " +
                                                std::to_string(b.id));
    if (b.A <= 0.0) throw std::invalid_argument("build_network: nonpositive damping at bus " +
                                                std::to_string(b.id));
    if (b.V <= 0.0) throw std::invalid_argument("build_network: nonpositive voltage at bus " +
                                                std::to_string(b.id));
    net.M(i) = b.M;
    net.A(i) = b.A;
    net.V(i) = b.V;
    net.Pd(i) = b.Pd;
  }

  net.D = Eigen::MatrixXd::Zero(n, m);
  net.gamma.resize(m);
  net.edges.reserve(m);
  for (int k = 0; k < m; ++k) {
    const auto& e = lines[k];
    if (e.from < 1 || e.from > n || e.to < 1 || e.to > n)
      throw std::invalid_argument("build_network: edge endpoint out of range on line " +
                                  std::to_string(k + 1));
    if (e.from == e.to)
      throw std::invalid_argument("build_network: self-loop (" + std::to_string(e.from) + "," +
                                  std::to_string(e.to) + ") is not a valid line");
    if (e.B < 0.0)
      throw std::invalid_argument("build_network: negative susceptance on line " +
                                  std::to_string(k + 1));
    const int lo = std::min(e.from, e.to), hi = std::max(e.from, e.to);
    net.D(lo - 1, k) = 1.0;   // '+' end is the lower-numbered bus
    net.D(hi - 1, k) = -1.0;
    net.edges.emplace_back(e.from, e.to, e.B);
    net.gamma(k) = e.B * net.V(e.from - 1) * net.V(e.to - 1);
    if (net.gamma(k) <= 0.0)
      throw std::invalid_argument("build_network: gamma_k must be positive on line " +
                                  std::to_string(k + 1));
  }

  // connectivity check (BFS over the undirected graph)
  std::vector<std::vector<int>> adj(n);
  for (int k = 0; k < m; ++k) {
    const auto& [i, j, B] = net.edges[k];
    adj[i - 1].push_back(j - 1);
    adj[j - 1].push_back(i - 1);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  int count = 1;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        bfs.push(v);
      }
  }
  if (count != n) throw std::invalid_argument("build_network: graph is disconnected");
  return net;
}

TreeCoordinates select_spanning_tree(const PowerNetwork& net, int root) {
  if (root < 1 || root > net.n)
    throw std::invalid_argument("select_spanning_tree: root out of range");
  // adjacency with edge ids, neighbors in input edge order
  std::vector<std::vector<std::pair<int, int>>> adj(net.n);
  for (int k = 0; k < net.m; ++k) {
    const auto& [i, j, B] = net.edges[k];
    adj[i - 1].emplace_back(j - 1, k);
    adj[j - 1].emplace_back(i - 1, k);
  }
  std::vector<char> seen(net.n, 0);
  std::vector<int> tree_edges;
  std::queue<int> bfs;
  bfs.push(root - 1);
  seen[root - 1] = 1;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop();
    for (const auto& [v, k] : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        tree_edges.push_back(k);
        bfs.push(v);
      }
  }

  TreeCoordinates tree;
  tree.tree_edges = tree_edges;
  tree.Dt.resize(net.n, net.n - 1);
  for (int c = 0; c < net.n - 1; ++c) tree.Dt.col(c) = net.D.col(tree_edges[c]);
  // Moore-Penrose inverse via the explicit formula (Dt^T Dt)^{-1} Dt^T
  tree.Dt_pinv = (tree.Dt.transpose() * tree.Dt).ldlt().solve(tree.Dt.transpose());
  tree.E = net.D.transpose() * tree.Dt_pinv.transpose();
  return tree;
}

double potential_energy(const PowerNetwork& net, const TreeCoordinates& tree,
                        const Eigen::VectorXd& phi) {
  const Eigen::VectorXd eta = tree.E * phi;
  return -(net.gamma.array() * eta.array().cos()).sum();
}

Eigen::VectorXd potential_gradient(const PowerNetwork& net, const TreeCoordinates& tree,
                                   const Eigen::VectorXd& phi) {
  const Eigen::VectorXd eta = tree.E * phi;
  return tree.Dt_pinv * (net.D * (net.gamma.array() * eta.array().sin()).matrix());
}

Eigen::MatrixXd scr_U(const PowerNetwork& net, const TreeCoordinates& tree,
                      const Eigen::VectorXd& eta) {
  const Eigen::VectorXd w = net.gamma.array() * eta.array().cos();
  const Eigen::MatrixXd DtpD = tree.Dt_pinv * net.D;
  return DtpD * w.asDiagonal() * DtpD.transpose();
}

Eigen::MatrixXd potential_hessian(const PowerNetwork& net, const TreeCoordinates& tree,
                                  const Eigen::VectorXd& phi) {
  return scr_U(net, tree, tree.E * phi);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> potential_derivatives(
    const PowerNetwork& net, const TreeCoordinates& tree, const Eigen::VectorXd& phi) {
  return {potential_gradient(net, tree, phi), potential_hessian(net, tree, phi)};
}

}  // namespace gridmarket
