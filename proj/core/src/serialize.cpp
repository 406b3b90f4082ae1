#include "fairhil/serialize.hpp"

#include <cmath>

namespace fairhil {

Json number_or_null(double value) { return std::isfinite(value) ? Json(value) : Json(nullptr); }

Json to_json(const ColumnSchema& s) {
  Json j{{"name", s.name}, {"kind", std::string(to_string(s.kind))}, {"missing_count", s.missing_count}};
  if (s.kind == ColumnKind::kNumeric) {
    j["min"] = number_or_null(s.min);
    j["max"] = number_or_null(s.max);
  } else {
    j["distinct_values"] = s.distinct_values;
  }
  return j;
}

Json to_json(const BinSpec& bins) {
  return Json{{"feature", bins.feature}, {"edges", bins.edges}, {"labels", bins.labels}};
}

Json to_json(const GroupStat& g) {
  return Json{{"label", g.label},
              {"count", g.count},
              {"positive_count", g.positive_count},
              {"acceptance_rate", g.acceptance_rate}};
}

Json to_json(const FeatureSummary& s) {
  Json groups = Json::array();
  for (const auto& g : s.groups) groups.push_back(to_json(g));
  return Json{{"feature", s.feature}, {"groups", groups}, {"overall_rate", s.overall_rate}};
}

Json to_json(const MetricValue& m) {
  Json j{{"kind", std::string(to_string(m.kind))},
         {"scope", m.scope},
         {"value", m.defined ? number_or_null(m.value) : Json(nullptr)},
         {"view", std::string(to_string(m.view))}};
  if (!m.defined) j["reason"] = m.reason;
  return j;
}

Json to_json(const CausalGraph& g) {
  Json nodes = Json::array();
  for (const auto& n : g.nodes) {
    Json bars = Json::array();
    for (const auto& b : n.bars) bars.push_back(to_json(b));
    nodes.push_back(Json{{"feature", n.feature},
                         {"in_degree", n.in_degree},
                         {"out_degree", n.out_degree},
                         {"spd_range", n.spd_range},
                         {"sensitive", n.sensitive},
                         {"target", n.target},
                         {"unfair", n.unfair},
                         {"importance", n.importance ? Json(*n.importance) : Json(nullptr)},
                         {"bars", bars}});
  }
  Json edges = Json::array();
  for (const auto& e : g.edges) edges.push_back(Json{{"src", e.src}, {"dst", e.dst}, {"strength", e.strength}});
  return Json{{"nodes", nodes},
              {"edges", edges},
              {"meta",
               {{"converged", g.meta.converged},
                {"h", g.meta.h},
                {"omega", g.meta.omega},
                {"lambda", g.meta.lambda},
                {"dropped_rows", g.meta.dropped_rows},
                {"reoriented_edges", g.meta.reoriented_edges},
                {"removed_cycle_edges", g.meta.removed_cycle_edges},
                {"strength_units", "max absolute standardized weight"},
                {"target_orientation", "edges touching the target point into it"},
                {"fingerprint", g.meta.fingerprint}}}};
}

Json to_json(const Prediction& p) {
  return Json{{"p", p.p}, {"label", p.label}, {"confidence", p.confidence}, {"logit", p.logit}};
}

Json to_json(const ContributionRow& row) {
  Json features = Json::array();
  for (const auto& f : row.features) {
    features.push_back(Json{{"feature", f.feature},
                            {"value", f.value},
                            {"sign", f.sign == SignClass::kNegative ? "negative" : "positive"},
                            {"depth", f.depth}});
  }
  return Json{{"row", row.row}, {"features", features}, {"intercept", row.intercept}, {"logit", row.logit}};
}

Json to_json(const Combination& c) {
  Json constraints = Json::array();
  for (const auto& [f, v] : c.constraints) constraints.push_back(Json{{"feature", f}, {"value", v}});
  return Json{{"id", c.id}, {"constraints", constraints}};
}

Json to_json(const SubgroupCard& card) {
  Json j = to_json(card.combination);
  j["count"] = card.member_count;
  j["positive_count"] = card.positive_count;
  j["rate"] = card.acceptance_rate ? Json(*card.acceptance_rate) : Json(nullptr);
  j["unfair"] = card.unfair;
  return j;
}

Json to_json(const ScatterData& s) {
  Json points = Json::array();
  for (const auto& p : s.points) {
    Json pt{{"id", p.row}, {"sim", p.similarity}, {"x", number_or_null(p.x)}, {"label", p.label}};
    if (p.predicted) pt["predicted"] = *p.predicted;
    if (p.selected) pt["selected"] = true;
    points.push_back(std::move(pt));
  }
  return Json{{"selected", s.selected}, {"view", std::string(to_string(s.view))}, {"points", points}};
}

Json to_json(const PairComparison& c) {
  Json features = Json::array();
  for (const auto& f : c.features) {
    features.push_back(Json{{"name", f.name}, {"va", f.value_a}, {"vb", f.value_b}, {"score", f.score}});
  }
  return Json{{"a", c.a}, {"b", c.b}, {"features", features}};
}

Json to_json(const expr::CustomMetricDef& def) { return Json{{"name", def.name}, {"source_text", def.source_text}}; }

Json model_to_json(const ModelArtifact& m) {
  Json weights = Json::object();
  Json standardization = Json::object();
  const auto& cols = m.encoder.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    weights[cols[j].name] = m.weights(static_cast<Eigen::Index>(j));
    standardization[cols[j].name] = Json{{"feature", cols[j].feature}, {"mean", cols[j].mean}, {"scale", cols[j].scale}};
  }
  return Json{{"family", "logistic"},
              {"weights", weights},
              {"intercept", m.intercept},
              {"standardization", standardization},
              {"positive_label", m.positive_label},
              {"negative_label", m.negative_label},
              {"metadata",
               {{"iterations", m.iterations},
                {"final_loss", m.final_loss},
                {"l2", m.l2},
                {"converged", m.converged},
                {"training_rows", m.training_rows}}}};
}

}  // namespace fairhil
