#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace gridmarket {

/// Transmission network: graph topology, line strengths and bus parameters.
struct PowerNetwork {
  int n = 0;  ///< bus count
  int m = 0;  ///< line count
  std::vector<std::tuple<int, int, double>> edges;  ///< (i, j, B_ij), 1-based bus ids
  Eigen::VectorXd V;      ///< per-bus voltage magnitudes (p.u.)
  Eigen::VectorXd M;      ///< diagonal inertia entries
  Eigen::VectorXd A;      ///< diagonal damping entries
  Eigen::VectorXd Pd;     ///< loads (MW)
  Eigen::VectorXd gamma;  ///< per-edge strengths gamma_k = B_ij * V_i * V_j
  Eigen::MatrixXd D;      ///< incidence matrix, n x m ('+' end = lower-numbered bus)
};

struct BusRecord {
  int id;
  double M, A, V, Pd;
};

struct EdgeRecord {
  int from, to;
  double B;
};

/// Spanning-tree coordinates: phi = Dt^T delta.
struct TreeCoordinates {
  Eigen::MatrixXd Dt;       ///< n x (n-1) tree incidence
  Eigen::MatrixXd Dt_pinv;  ///< (n-1) x n Moore-Penrose inverse (Dt^T Dt)^{-1} Dt^T
  Eigen::MatrixXd E;        ///< m x (n-1) map eta = E phi = D^T Dt_pinv^T phi
  std::vector<int> tree_edges;  ///< edge ids selected for the tree
};

PowerNetwork build_network(const std::vector<BusRecord>& buses,
                           const std::vector<EdgeRecord>& lines);

/// Deterministic breadth-first spanning tree rooted at `root` (1-based).
TreeCoordinates select_spanning_tree(const PowerNetwork& net, int root = 1);

/// U(phi) = -1^T Gamma cos(D^T Dt_pinv^T phi)
double potential_energy(const PowerNetwork& net, const TreeCoordinates& tree,
                        const Eigen::VectorXd& phi);

Eigen::VectorXd potential_gradient(const PowerNetwork& net, const TreeCoordinates& tree,
                                   const Eigen::VectorXd& phi);

Eigen::MatrixXd potential_hessian(const PowerNetwork& net, const TreeCoordinates& tree,
                                  const Eigen::VectorXd& phi);

std::pair<Eigen::VectorXd, Eigen::MatrixXd> potential_derivatives(
    const PowerNetwork& net, const TreeCoordinates& tree, const Eigen::VectorXd& phi);

/// scr_U(eta) = Dt_pinv D diag(gamma .* cos(eta)) D^T Dt_pinv^T
Eigen::MatrixXd scr_U(const PowerNetwork& net, const TreeCoordinates& tree,
                      const Eigen::VectorXd& eta);

}  // namespace gridmarket
