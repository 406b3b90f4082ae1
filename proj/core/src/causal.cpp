#include "fairhil/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <unsupported/Eigen/MatrixFunctions>

#include "fairhil/error.hpp"
#include "fairhil/metrics.hpp"

namespace fairhil {

using Eigen::MatrixXd;

namespace {

void require_square(const MatrixXd& w) {
  if (w.rows() != w.cols()) {
    throw Error(ErrorCode::kValidation, "weight matrix must be square, got " + std::to_string(w.rows()) + "x" +
                                            std::to_string(w.cols()));
  }
}

MatrixXd exp_hadamard_square(const MatrixXd& w) {
  const MatrixXd sq = w.cwiseProduct(w);
  return sq.exp();
}

MatrixXd soft_threshold(const MatrixXd& v, double t) {
  return v.unaryExpr([t](double x) { return x > t ? x - t : (x < -t ? x + t : 0.0); });
}

}  // namespace

double acyclicity(const MatrixXd& w) {
  require_square(w);
  if (w.size() == 0) return 0.0;
  return exp_hadamard_square(w).trace() - static_cast<double>(w.rows());
}

ValueGradient acyclicity_with_gradient(const MatrixXd& w) {
  require_square(w);
  if (w.size() == 0) return {0.0, MatrixXd()};
  const MatrixXd e = exp_hadamard_square(w);
  return {e.trace() - static_cast<double>(w.rows()), e.transpose().cwiseProduct(2.0 * w)};
}

LeastSquaresLoss::LeastSquaresLoss(const MatrixXd& x) {
  const double n = std::max<double>(1.0, static_cast<double>(x.rows()));
  gram_ = (x.transpose() * x) / n;
}

ValueGradient LeastSquaresLoss::operator()(const MatrixXd& w) const {
  // R = X - XW = X(I - W); (1/2n)||R||^2 = 0.5 tr((I-W)^T G (I-W)).
  const MatrixXd m = MatrixXd::Identity(w.rows(), w.cols()) - w;
  const MatrixXd gm = gram_ * m;
  return {0.5 * (m.cwiseProduct(gm)).sum(), -gm};
}

namespace {

// Smooth part of the augmented Lagrangian.
struct Smooth {
  const LeastSquaresLoss& loss;
  double rho;
  double alpha;

  ValueGradient operator()(const MatrixXd& w) const {
    ValueGradient f = loss(w);
    ValueGradient h = acyclicity_with_gradient(w);
    f.value += 0.5 * rho * h.value * h.value + alpha * h.value;
    f.gradient += (rho * h.value + alpha) * h.gradient;
    return f;
  }
};

// Proximal gradient descent with Barzilai-Borwein trial steps and
// backtracking on the quadratic upper bound, which makes every accepted step
// non-increasing in the full objective.
MatrixXd minimize_inner(const Smooth& smooth, MatrixXd w, double lambda, const StructureConfig& cfg, int outer,
                        double& step, long& total_inner, const std::function<void(const InnerStep&)>& observer) {
  ValueGradient cur = smooth(w);
  double t = step;
  for (int it = 1; it <= cfg.max_inner_iterations; ++it) {
    MatrixXd next;
    ValueGradient trial;
    MatrixXd diff;
    bool accepted = false;
    while (t > 1e-30) {
      next = soft_threshold(w - t * cur.gradient, t * lambda);
      next.diagonal().setZero();
      diff = next - w;
      trial = smooth(next);
      const double bound = cur.value + (cur.gradient.cwiseProduct(diff)).sum() + diff.squaredNorm() / (2.0 * t);
      if (std::isfinite(trial.value) && trial.value <= bound + 1e-12 * std::abs(cur.value)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    ++total_inner;
    if (observer) {
      observer(InnerStep{outer, it, trial.value + lambda * next.cwiseAbs().sum(), t, smooth.rho, smooth.alpha});
    }
    const double change = diff.cwiseAbs().maxCoeff();
    const MatrixXd y = trial.gradient - cur.gradient;
    const double sy = (diff.cwiseProduct(y)).sum();
    const double ss = diff.squaredNorm();
    w = std::move(next);
    cur = std::move(trial);
    if (change <= cfg.inner_tolerance) break;
    t = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e6) : std::min(t * 2.0, 1e6);
  }
  step = t;
  return w;
}

}  // namespace

StructureResult learn_structure(const MatrixXd& x, const StructureConfig& cfg,
                                const std::function<void(const InnerStep&)>& observer) {
  if (!x.allFinite()) throw Error(ErrorCode::kValidation, "structure learning input has non-finite values");
  const Eigen::Index d = x.cols();
  StructureResult result;
  result.weights = MatrixXd::Zero(d, d);
  if (d < 2) {
    result.converged = true;
    return result;
  }

  const LeastSquaresLoss loss(x);
  double rho = cfg.rho_init;
  double alpha = cfg.alpha_init;
  double h = std::numeric_limits<double>::infinity();
  MatrixXd w = MatrixXd::Zero(d, d);
  double step = 1.0;

  for (int outer = 1; outer <= cfg.max_outer_iterations; ++outer) {
    result.outer_iterations = outer;
    MatrixXd candidate;
    double h_new = 0.0;
    for (;;) {
      double trial_step = step;
      candidate = minimize_inner(Smooth{loss, rho, alpha}, w, cfg.l1_penalty, cfg, outer, trial_step,
                                 result.inner_iterations, observer);
      h_new = acyclicity(candidate);
      if (h_new > cfg.h_progress * h && rho < cfg.rho_max) {
        rho *= cfg.rho_multiplier;
        step = std::max(trial_step / cfg.rho_multiplier, 1e-12);
      } else {
        step = trial_step;
        break;
      }
    }
    w = std::move(candidate);
    h = h_new;
    alpha += rho * h;
    if (h <= cfg.h_tolerance || rho >= cfg.rho_max) break;
  }
  result.weights = std::move(w);
  result.h = h;
  result.rho = rho;
  result.alpha = alpha;
  result.converged = h <= cfg.h_tolerance;
  return result;
}

// ---------------------------------------------------------------------------
// Feature graph

const GraphNode* CausalGraph::find(std::string_view feature) const {
  for (const auto& n : nodes) {
    if (n.feature == feature) return &n;
  }
  return nullptr;
}

GraphNode* CausalGraph::find(std::string_view feature) {
  for (auto& n : nodes) {
    if (n.feature == feature) return &n;
  }
  return nullptr;
}

void CausalGraph::recompute_degrees() {
  for (auto& n : nodes) n.in_degree = n.out_degree = 0;
  for (const auto& e : edges) {
    if (auto* s = find(e.src)) ++s->out_degree;
    if (auto* t = find(e.dst)) ++t->in_degree;
  }
}

std::optional<std::vector<std::string>> CausalGraph::topological_order() const {
  std::map<std::string, std::size_t> indegree;
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& n : nodes) indegree[n.feature] = 0;
  for (const auto& e : edges) {
    ++indegree[e.dst];
    out[e.src].push_back(e.dst);
  }
  std::vector<std::string> ready;
  for (const auto& n : nodes) {
    if (indegree[n.feature] == 0) ready.push_back(n.feature);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (const auto& u : out[v]) {
      if (--indegree[u] == 0) ready.push_back(u);
    }
  }
  if (order.size() != indegree.size()) return std::nullopt;
  return order;
}

bool CausalGraph::is_acyclic() const { return topological_order().has_value(); }

namespace {

// Returns the edge indices of one directed cycle, or empty if none.
std::vector<std::size_t> find_cycle(const std::vector<GraphEdge>& edges, std::size_t n_nodes,
                                    const std::map<std::string, std::size_t>& index) {
  std::vector<std::vector<std::size_t>> out(n_nodes);
  for (std::size_t i = 0; i < edges.size(); ++i) out[index.at(edges[i].src)].push_back(i);
  std::vector<int> color(n_nodes, 0);
  std::vector<std::size_t> via(n_nodes, 0);  // edge used to reach the node
  for (std::size_t root = 0; root < n_nodes; ++root) {
    if (color[root]) continue;
    // Iterative DFS: (node, next out-edge position).
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, pos] = stack.back();
      if (pos == out[v].size()) {
        color[v] = 2;
        stack.pop_back();
        continue;
      }
      const std::size_t e = out[v][pos++];
      const std::size_t u = index.at(edges[e].dst);
      if (color[u] == 1) {
        std::vector<std::size_t> cycle{e};
        for (std::size_t x = v; x != u; x = index.at(edges[via[x]].src)) cycle.push_back(via[x]);
        return cycle;
      }
      if (color[u] == 0) {
        color[u] = 1;
        via[u] = e;
        stack.emplace_back(u, 0);
      }
    }
  }
  return {};
}

}  // namespace

CausalGraph aggregate_to_features(const MatrixXd& w, const std::vector<EncodedColumn>& columns,
                                  const DataTable& table, double omega, std::size_t k_max) {
  require_square(w);
  if (static_cast<std::size_t>(w.rows()) != columns.size()) {
    throw Error(ErrorCode::kValidation, "weight matrix size does not match the encoded column count");
  }
  CausalGraph g;
  std::map<std::string, std::size_t> index;
  const std::string target = table.has_target() ? table.target() : std::string();
  for (const auto& col : table.columns()) {
    index.emplace(col.name(), g.nodes.size());
    GraphNode node;
    node.feature = col.name();
    node.target = col.name() == target;
    g.nodes.push_back(std::move(node));
  }

  const std::size_t n = g.nodes.size();
  std::vector<double> strength(n * n, 0.0);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const std::size_t a = index.at(columns[i].feature);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const std::size_t b = index.at(columns[j].feature);
      if (a == b) continue;
      auto& s = strength[a * n + b];
      s = std::max(s, std::abs(w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
  }

  if (!target.empty()) {
    const std::size_t t = index.at(target);
    for (std::size_t x = 0; x < n; ++x) {
      if (x == t || strength[t * n + x] < omega) continue;
      // Count only edges whose direction actually flips.
      if (strength[t * n + x] > strength[x * n + t] && strength[x * n + t] < omega) ++g.meta.reoriented_edges;
      strength[x * n + t] = std::max(strength[x * n + t], strength[t * n + x]);
      strength[t * n + x] = 0.0;
    }
  }

  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && strength[a * n + b] >= omega) {
        g.edges.push_back(GraphEdge{g.nodes[a].feature, g.nodes[b].feature, strength[a * n + b]});
      }
    }
  }
  for (auto cycle = find_cycle(g.edges, n, index); !cycle.empty(); cycle = find_cycle(g.edges, n, index)) {
    const auto weakest = *std::min_element(cycle.begin(), cycle.end(), [&](std::size_t x, std::size_t y) {
      return g.edges[x].strength < g.edges[y].strength;
    });
    g.edges.erase(g.edges.begin() + static_cast<std::ptrdiff_t>(weakest));
    ++g.meta.removed_cycle_edges;
  }

  if (table.has_target()) {
    const Outcomes recorded = table.outcomes();
    for (auto& node : g.nodes) {
      const FeatureSummary s = summarize_feature(table, node.feature, recorded, k_max);
      node.bars = s.groups;
      node.spd_range = node.target ? 0.0 : spd_range(table, node.feature, recorded, k_max);
    }
  }
  g.meta.omega = omega;
  g.recompute_degrees();
  return g;
}

CausalGraph build_causal_graph(const DataTable& table, const StructureConfig& config, std::size_t k_max) {
  const EncodedMatrix enc = encode(table);
  const StructureResult learned = learn_structure(enc.x, config);
  CausalGraph g = aggregate_to_features(learned.weights, enc.columns(), table, config.edge_threshold, k_max);
  g.meta.converged = learned.converged;
  g.meta.h = learned.h;
  g.meta.lambda = config.l1_penalty;
  g.meta.dropped_rows = enc.dropped_rows;
  return g;
}

CausalGraph drill_down(const CausalGraph& graph, const std::set<std::string>& keep) {
  for (const auto& f : keep) {
    if (!graph.find(f)) throw Error(ErrorCode::kNotFound, "unknown feature '" + f + "' in drill-down selection");
  }
  CausalGraph out;
  out.meta = graph.meta;
  for (const auto& n : graph.nodes) {
    if (n.target || keep.count(n.feature)) out.nodes.push_back(n);
  }
  for (const auto& e : graph.edges) {
    if (out.find(e.src) && out.find(e.dst)) out.edges.push_back(e);
  }
  out.recompute_degrees();
  return out;
}

}  // namespace fairhil
