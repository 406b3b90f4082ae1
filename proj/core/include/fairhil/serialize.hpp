#pragma once

#include <json.hpp>

#include "fairhil/causal.hpp"
#include "fairhil/data_table.hpp"
#include "fairhil/expr.hpp"
#include "fairhil/metrics.hpp"
#include "fairhil/model.hpp"
#include "fairhil/similarity.hpp"
#include "fairhil/subgroup.hpp"
#include "fairhil/summary.hpp"

// JSON shapes shared by the HTTP API, the report and the CLI. Keys are
// emitted in sorted order (nlohmann::json default), which keeps output
// byte-stable.
namespace fairhil {

using Json = nlohmann::json;

// Finite numbers as-is, NaN/inf as null.
Json number_or_null(double value);

Json to_json(const ColumnSchema& schema);
Json to_json(const BinSpec& bins);
Json to_json(const GroupStat& stat);
Json to_json(const FeatureSummary& summary);
Json to_json(const MetricValue& metric);
Json to_json(const CausalGraph& graph);
Json to_json(const Prediction& prediction);
Json to_json(const ContributionRow& row);
Json to_json(const Combination& combination);
Json to_json(const SubgroupCard& card);
Json to_json(const ScatterData& scatter);
Json to_json(const PairComparison& comparison);
Json to_json(const expr::CustomMetricDef& def);

// Weights keyed by encoded column name, intercept, standardization
// parameters and training metadata.
Json model_to_json(const ModelArtifact& model);

}  // namespace fairhil
