#pragma once

#include <set>
#include <string>
#include <vector>

#include "fairhil/causal.hpp"
#include "fairhil/config.hpp"
#include "fairhil/metrics.hpp"
#include "fairhil/model.hpp"
#include "fairhil/serialize.hpp"
#include "fairhil/subgroup.hpp"

namespace fairhil {

inline constexpr int kReportFormatVersion = 1;

struct SensitiveDesignation {
  std::string feature;
  std::vector<std::string> privileged;
  bool user_defined = false;  // false: default rule (highest acceptance)
};

struct CustomMetricSource {
  std::string name;
  std::string source_text;
};

// Everything the report reads. Pointers are non-owning; `model` may be null.
struct ReportInputs {
  const DataTable* table = nullptr;
  const CausalGraph* graph = nullptr;  // dataset view
  const TrainedModel* model = nullptr;
  std::string role;
  Json dataset_source;
  Json model_settings;
  std::vector<SensitiveDesignation> sensitive;
  std::vector<MetricKind> metrics;
  std::vector<CustomMetricSource> custom_metrics;
  std::set<std::string> unfair_features;
  std::vector<Combination> unfair_subgroups;
  Config config;
  StructureConfig structure;
};

// Deterministic: no session id, no clock. Keys are sorted on dump.
Json build_report(const ReportInputs& inputs);

// Plain-text rendering of a report document.
std::string render_report_text(const Json& report);

}  // namespace fairhil
