#include "fairhil/report.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "fairhil/error.hpp"
#include "fairhil/summary.hpp"

namespace fairhil {
namespace {

Json metric_table(const ReportInputs& in, View view, const GroupSpec& group) {
  const Outcomes labels = in.table->outcomes();
  const Outcomes& outcomes = view == View::kModel ? in.model->outcomes : labels;
  MetricContext ctx{*in.table, view, outcomes, labels, in.config.k_max};
  Json rows = Json::array();
  for (const auto& m : metric_suite(ctx, group, in.metrics)) rows.push_back(to_json(m));
  return rows;
}

Json designation_for(const ReportInputs& in, const std::string& feature) {
  for (const auto& s : in.sensitive) {
    if (s.feature == feature) return Json{{"privileged", s.privileged}, {"source", s.user_defined ? "user" : "default"}};
  }
  const GroupSpec g = default_privileged(*in.table, feature, in.config.k_max);
  return Json{{"privileged", g.privileged}, {"source", "default"}};
}

Json feature_evidence(const ReportInputs& in, const std::string& feature) {
  Json ev = Json::object();
  const GraphNode* node = in.graph->find(feature);
  ev["in_degree"] = node ? Json(node->in_degree) : Json(nullptr);
  ev["out_degree"] = node ? Json(node->out_degree) : Json(nullptr);
  const Outcomes labels = in.table->outcomes();
  ev["spd_range"] = spd_range(*in.table, feature, labels, in.config.k_max);
  try {
    const Json d = designation_for(in, feature);
    const GroupSpec g{feature, d["privileged"].get<std::vector<std::string>>()};
    const GroupMembers members = resolve_group(*in.table, g, in.config.k_max);
    ev["privileged"] = d["privileged"];
    ev["spd"] = to_json(spd(labels, members, feature, View::kDataset));
    ev["spd_model"] = in.model ? to_json(spd(in.model->outcomes, members, feature, View::kModel)) : Json(nullptr);
  } catch (const Error&) {
    // Single-valued feature: no proper privileged subset exists.
    ev["privileged"] = nullptr;
    ev["spd"] = nullptr;
    ev["spd_model"] = nullptr;
  }
  return ev;
}

Json formulas() {
  return Json{
      {"spd", "P(y=1 | unprivileged) - P(y=1 | privileged)"},
      {"disparate_impact", "P(y=1 | unprivileged) / P(y=1 | privileged)"},
      {"eq_opp_diff", "TPR(unprivileged) - TPR(privileged)"},
      {"avg_odds_diff", "((FPR_u - FPR_p) + (TPR_u - TPR_p)) / 2"},
      {"theil", "mean((b/mu) ln(b/mu)), b = yhat - y + 1"},
      {"spd_range", "max - min acceptance over values/bins"},
      {"binning", "equal width, k = min(k_max, ceil(sqrt(n)))"},
      {"default_privileged", "value/bin with the highest recorded acceptance"},
      {"confidence", "|2p - 1|"},
      {"criticality", "|w.x| per feature / max within the row"},
      {"similarity", "Pearson correlation over standardized one-hot rows"},
      {"edge_strength", "max |W| over encoded column pairs, kept when >= omega"},
      {"acyclicity", "tr(exp(W o W)) - d"},
  };
}

}  // namespace

Json build_report(const ReportInputs& in) {
  if (!in.table || !in.graph) throw Error(ErrorCode::kInternal, "report inputs incomplete");
  const DataTable& t = *in.table;
  const Outcomes labels = t.outcomes();

  Json columns = Json::array();
  for (const auto& s : t.schema()) columns.push_back(to_json(s));
  const std::size_t positives = t.positive_count();
  Json dataset{{"instances", t.rows()},
               {"features", t.features().size()},
               {"target", t.target()},
               {"positive_label", t.positive_label()},
               {"negative_label", t.negative_label()},
               {"positives", positives},
               {"acceptance_rate", static_cast<double>(positives) / static_cast<double>(t.rows())},
               {"source", in.dataset_source},
               {"columns", columns}};

  Json sensitive = Json::array();
  for (const auto& s : in.sensitive) {
    const GroupSpec g{s.feature, s.privileged};
    Json entry{{"feature", s.feature},
               {"privileged", s.privileged},
               {"privileged_source", s.user_defined ? "user" : "default"},
               {"dataset", metric_table(in, View::kDataset, g)},
               {"spd_range", {{"dataset", spd_range(t, s.feature, labels, in.config.k_max)}}}};
    if (in.model) {
      entry["model"] = metric_table(in, View::kModel, g);
      entry["spd_range"]["model"] = spd_range(t, s.feature, in.model->outcomes, in.config.k_max);
    } else {
      entry["model"] = nullptr;
      entry["spd_range"]["model"] = nullptr;
    }
    sensitive.push_back(std::move(entry));
  }

  Json graph = to_json(*in.graph);
  Json node_names = Json::array();
  for (const auto& n : in.graph->nodes) node_names.push_back(n.feature);
  graph.erase("nodes");
  graph["nodes"] = node_names;

  Json flagged_features = Json::array();
  for (const auto& f : in.unfair_features) {
    flagged_features.push_back(Json{{"feature", f}, {"evidence", feature_evidence(in, f)}});
  }
  Json flagged_subgroups = Json::array();
  for (const auto& c : in.unfair_subgroups) {
    const SubgroupCard card = build_card(t, c, labels, in.config.max_constraints, in.config.k_max);
    Json j = to_json(card);
    j["unfair"] = true;
    if (in.model) {
      const SubgroupCard mc = build_card(t, c, in.model->outcomes, in.config.max_constraints, in.config.k_max);
      j["model_rate"] = mc.acceptance_rate ? Json(*mc.acceptance_rate) : Json(nullptr);
    } else {
      j["model_rate"] = nullptr;
    }
    flagged_subgroups.push_back(std::move(j));
  }

  Json model = nullptr;
  if (in.model) {
    const TrainedModel& m = *in.model;
    std::size_t known = 0, pos = 0;
    for (const auto r : m.split.test) {
      if (m.outcomes[r] == kUnknownOutcome) continue;
      ++known;
      pos += m.outcomes[r] == 1 ? 1 : 0;
    }
    Json importance = Json::array();
    for (const auto& [f, v] : feature_importance(m.artifact)) importance.push_back(Json{{"feature", f}, {"importance", v}});
    model = Json{{"family", "logistic"},
                 {"settings", in.model_settings},
                 {"train_rows", m.split.train.size()},
                 {"test_rows", m.split.test.size()},
                 {"test_accuracy", m.test_accuracy},
                 {"test_acceptance_rate", known ? Json(static_cast<double>(pos) / static_cast<double>(known)) : Json(nullptr)},
                 {"converged", m.artifact.converged},
                 {"iterations", m.artifact.iterations},
                 {"final_loss", m.artifact.final_loss},
                 {"importance", importance},
                 {"theil", to_json(theil_index(m.outcomes, labels))}};
  }

  Json custom = Json::array();
  for (const auto& c : in.custom_metrics) custom.push_back(Json{{"name", c.name}, {"source_text", c.source_text}});
  Json metric_names = Json::array();
  for (const auto k : in.metrics) metric_names.push_back(std::string(to_string(k)));

  Json settings{{"omega", in.config.omega},
                {"lambda", in.structure.l1_penalty},
                {"k_max", in.config.k_max},
                {"max_constraints", in.config.max_constraints},
                {"min_support", in.config.min_support},
                {"l2", in.config.l2},
                {"structure",
                 {{"rho_init", in.structure.rho_init},
                  {"rho_multiplier", in.structure.rho_multiplier},
                  {"rho_max", in.structure.rho_max},
                  {"h_tolerance", in.structure.h_tolerance},
                  {"max_outer_iterations", in.structure.max_outer_iterations},
                  {"inner_tolerance", in.structure.inner_tolerance}}},
                {"formulas", formulas()}};

  return Json{{"format", "fairhil-report"},
              {"format_version", kReportFormatVersion},
              {"role", in.role},
              {"dataset", dataset},
              {"metrics", metric_names},
              {"sensitive", sensitive},
              {"graph", graph},
              {"flags", {{"features", flagged_features}, {"subgroups", flagged_subgroups}}},
              {"model", model},
              {"custom_metrics", custom},
              {"settings", settings}};
}

namespace {

std::string num(const Json& v, const char* fmt = "%.4f") {
  if (!v.is_number()) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v.get<double>());
  return buf;
}

std::string join(const Json& arr) {
  std::string out;
  for (const auto& v : arr) {
    if (!out.empty()) out += ", ";
    out += v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

}  // namespace

std::string render_report_text(const Json& r) {
  std::ostringstream o;
  const Json& d = r.at("dataset");
  o << "FAIRNESS INVESTIGATION REPORT\n\n";
  o << "== Dataset overview ==\n";
  o << "instances: " << d.at("instances").get<std::size_t>() << "\n";
  o << "features: " << d.at("features").get<std::size_t>() << "\n";
  o << "target: " << d.at("target").get<std::string>() << " (positive = " << d.at("positive_label").get<std::string>()
    << ")\n";
  o << "positives: " << d.at("positives").get<std::size_t>() << "\n";
  o << "acceptance rate: " << num(d.at("acceptance_rate")) << "\n\n";

  o << "== Sensitive features ==\n";
  if (r.at("sensitive").empty()) o << "(none)\n";
  for (const auto& s : r.at("sensitive")) {
    o << s.at("feature").get<std::string>() << "  privileged = {" << join(s.at("privileged")) << "} ("
      << s.at("privileged_source").get<std::string>() << ")\n";
    o << "  spd_range: dataset " << num(s.at("spd_range").at("dataset")) << ", model "
      << num(s.at("spd_range").at("model")) << "\n";
    const Json& ds = s.at("dataset");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      o << "  " << ds[i].at("kind").get<std::string>() << ": dataset " << num(ds[i].at("value"));
      if (s.at("model").is_array()) o << ", model " << num(s.at("model")[i].at("value"));
      o << "\n";
    }
  }
  o << "\n== Causal graph edges ==\n";
  const Json& g = r.at("graph");
  if (g.at("edges").empty()) o << "(none)\n";
  for (const auto& e : g.at("edges")) {
    o << e.at("src").get<std::string>() << " -> " << e.at("dst").get<std::string>() << "  " << num(e.at("strength"))
      << "\n";
  }
  o << "converged: " << (g.at("meta").at("converged").get<bool>() ? "yes" : "no")
    << ", h = " << num(g.at("meta").at("h"), "%.3g") << "\n\n";

  o << "== Flagged features ==\n";
  const Json& ff = r.at("flags").at("features");
  if (ff.empty()) o << "(none)\n";
  for (const auto& f : ff) {
    const Json& ev = f.at("evidence");
    o << f.at("feature").get<std::string>() << "  spd "
      << (ev.at("spd").is_object() ? num(ev.at("spd").at("value")) : std::string("n/a")) << ", spd_range "
      << num(ev.at("spd_range")) << "\n";
  }
  o << "\n== Flagged subgroups ==\n";
  const Json& fs = r.at("flags").at("subgroups");
  if (fs.empty()) o << "(none)\n";
  for (const auto& c : fs) {
    std::string desc;
    for (const auto& k : c.at("constraints")) {
      if (!desc.empty()) desc += " & ";
      desc += k.at("feature").get<std::string>() + " = " + k.at("value").get<std::string>();
    }
    o << desc << "  members " << c.at("count").get<std::size_t>() << ", rate " << num(c.at("rate")) << "\n";
  }
  o << "\n== Model ==\n";
  const Json& m = r.at("model");
  if (m.is_null()) {
    o << "(not trained)\n";
  } else {
    o << "logistic regression, " << m.at("train_rows").get<std::size_t>() << " train / "
      << m.at("test_rows").get<std::size_t>() << " test rows\n";
    o << "test accuracy: " << num(m.at("test_accuracy")) << "\n";
    o << "test acceptance rate: " << num(m.at("test_acceptance_rate")) << "\n";
    o << "theil index: " << num(m.at("theil").at("value")) << "\n";
  }
  o << "\n== Custom metrics ==\n";
  if (r.at("custom_metrics").empty()) o << "(none)\n";
  for (const auto& c : r.at("custom_metrics")) {
    o << c.at("name").get<std::string>() << " = " << c.at("source_text").get<std::string>() << "\n";
  }
  o << "\n== Settings ==\n";
  const Json& st = r.at("settings");
  o << "omega " << num(st.at("omega"), "%g") << ", lambda " << num(st.at("lambda"), "%g") << ", k_max "
    << st.at("k_max").get<std::size_t>() << ", K " << st.at("max_constraints").get<std::size_t>() << ", l2 "
    << num(st.at("l2"), "%g") << "\n";
  for (const auto& [k, v] : st.at("formulas").items()) o << k << ": " << v.get<std::string>() << "\n";
  return o.str();
}

}  // namespace fairhil
