#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fairhil/binning.hpp"
#include "fairhil/data_table.hpp"
#include "fairhil/encoding.hpp"
#include "fairhil/summary.hpp"

namespace fairhil {

// Continuous DAG learning for a linear SEM: minimize
//   (1/2n) ||X - XW||_F^2 + lambda ||W||_1   subject to h(W) = 0,
// with h(W) = tr(exp(W o W)) - d, through an augmented Lagrangian
//   F(W) + (rho/2) h(W)^2 + alpha h(W).
struct StructureConfig {
  double l1_penalty = 0.05;
  double edge_threshold = 0.3;
  double rho_init = 1.0;
  double rho_multiplier = 10.0;
  double rho_max = 1e16;
  double alpha_init = 0.0;
  double h_tolerance = 1e-8;
  int max_outer_iterations = 100;
  // Required shrink of h per outer step before rho is raised.
  double h_progress = 0.25;
  double inner_tolerance = 1e-6;
  int max_inner_iterations = 20000;
};

struct ValueGradient {
  double value = 0.0;
  Eigen::MatrixXd gradient;
};

// h(W) = tr(exp(W o W)) - d; zero exactly when W's weighted digraph is
// acyclic. Throws kValidation for a non-square matrix.
double acyclicity(const Eigen::MatrixXd& w);
// Also returns grad h = exp(W o W)^T o 2W.
ValueGradient acyclicity_with_gradient(const Eigen::MatrixXd& w);

// (1/2n) ||X - XW||_F^2 and its gradient, evaluated through the Gram matrix
// so the cost per evaluation does not depend on n.
class LeastSquaresLoss {
 public:
  explicit LeastSquaresLoss(const Eigen::MatrixXd& x);
  ValueGradient operator()(const Eigen::MatrixXd& w) const;
  Eigen::Index dim() const noexcept { return gram_.rows(); }

 private:
  Eigen::MatrixXd gram_;  // X^T X / n
};

// Reported after each accepted inner step.
struct InnerStep {
  int outer = 0;
  int inner = 0;
  double objective = 0.0;  // augmented Lagrangian including the L1 term
  double step = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
};

struct StructureResult {
  Eigen::MatrixXd weights;  // unthresholded, zero diagonal
  bool converged = false;   // h <= h_tolerance
  double h = 0.0;
  int outer_iterations = 0;
  long inner_iterations = 0;
  double rho = 0.0;
  double alpha = 0.0;
};

StructureResult learn_structure(const Eigen::MatrixXd& x, const StructureConfig& config,
                                const std::function<void(const InnerStep&)>& observer = {});

// Feature-level graph exposed to the UI.
struct GraphNode {
  std::string feature;
  std::size_t in_degree = 0;
  std::size_t out_degree = 0;
  double spd_range = 0.0;
  bool sensitive = false;
  bool target = false;
  bool unfair = false;
  std::optional<double> importance;  // model view only
  std::vector<GroupStat> bars;       // acceptance per value/bin
};

struct GraphEdge {
  std::string src;
  std::string dst;
  double strength = 0.0;  // max |W| over the encoded column pairs
};

struct GraphMeta {
  bool converged = false;
  double h = 0.0;
  double omega = 0.0;
  double lambda = 0.0;
  std::size_t dropped_rows = 0;
  std::size_t reoriented_edges = 0;  // target-adjacent edges turned toward the target
  std::size_t removed_cycle_edges = 0;
  std::string fingerprint;
};

struct CausalGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  GraphMeta meta;

  const GraphNode* find(std::string_view feature) const;
  GraphNode* find(std::string_view feature);
  void recompute_degrees();
  bool is_acyclic() const;
  // Node names in a topological order; nullopt when a cycle exists.
  std::optional<std::vector<std::string>> topological_order() const;
};

// Collapses encoded weights to features: strength(a -> b) = max |W[i, j]|
// over columns i of a and j of b; keeps strengths >= omega. Edges touching
// the target are oriented into it and any remaining cycle is broken by
// dropping its weakest edge. Nodes cover every table column, with dataset
// view spd_range and acceptance bars.
CausalGraph aggregate_to_features(const Eigen::MatrixXd& w, const std::vector<EncodedColumn>& columns,
                                  const DataTable& table, double omega, std::size_t k_max = kDefaultMaxBins);

// encode -> learn_structure -> aggregate_to_features, with meta filled in.
CausalGraph build_causal_graph(const DataTable& table, const StructureConfig& config,
                               std::size_t k_max = kDefaultMaxBins);

// Induced subgraph on keep plus the target. Throws kNotFound for unknown names.
CausalGraph drill_down(const CausalGraph& graph, const std::set<std::string>& keep);

}  // namespace fairhil
