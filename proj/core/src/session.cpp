#include "fairhil/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "fairhil/csv.hpp"
#include "fairhil/error.hpp"
#include "fairhil/expr.hpp"
#include "fairhil/summary.hpp"
#include "fairhil/synth.hpp"

namespace fairhil {

std::string_view to_string(Role role) noexcept {
  return role == Role::kDataScientist ? "data_scientist" : "domain_expert";
}

Role parse_role(std::string_view text) {
  if (text == "data_scientist") return Role::kDataScientist;
  if (text == "domain_expert") return Role::kDomainExpert;
  throw Error(ErrorCode::kValidation, "unknown role '" + std::string(text) + "'",
              "expected: data_scientist, domain_expert");
}

std::string_view to_string(WizardStep step) noexcept {
  switch (step) {
    case WizardStep::kDataset: return "dataset";
    case WizardStep::kTarget: return "target";
    case WizardStep::kModel: return "model";
    case WizardStep::kSensitive: return "sensitive";
    case WizardStep::kMetrics: return "metrics";
    case WizardStep::kReview: return "review";
  }
  return "?";
}

std::vector<WizardStep> wizard_steps(Role role) {
  if (role == Role::kDataScientist) {
    return {WizardStep::kDataset, WizardStep::kTarget, WizardStep::kModel, WizardStep::kSensitive,
            WizardStep::kMetrics};
  }
  return {WizardStep::kDataset, WizardStep::kTarget, WizardStep::kSensitive, WizardStep::kReview};
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Json cell_json(const Column& col, std::size_t row) {
  if (col.is_missing(row)) return nullptr;
  if (col.is_numeric()) return col.number(row);
  return col.label(row);
}

std::shared_ptr<const DataTable> load_source(const DatasetSource& src, const Config& cfg) {
  if (src.kind == DatasetSource::Kind::kSynth) {
    if (src.rows < 10 || src.rows > cfg.max_rows) {
      throw Error(ErrorCode::kValidation, "synth rows must be in [10, " + std::to_string(cfg.max_rows) + "]");
    }
    return std::make_shared<const DataTable>(synth_loans(src.seed, src.rows));
  }
  if (src.csv.size() > cfg.max_upload_bytes) {
    throw Error(ErrorCode::kValidation, "upload exceeds the size limit",
                "limit_bytes=" + std::to_string(cfg.max_upload_bytes));
  }
  auto table = std::make_shared<const DataTable>(load_csv_text(src.csv));
  if (table->rows() > cfg.max_rows) {
    throw Error(ErrorCode::kValidation, "upload exceeds the row limit", "limit_rows=" + std::to_string(cfg.max_rows));
  }
  return table;
}

}  // namespace

Session::Session(std::string id, Role role, Config config)
    : id_(std::move(id)), role_(role), config_(std::move(config)) {
  model_settings_.l2 = config_.l2;
  model_settings_.test_fraction = config_.test_fraction;
  if (role_ == Role::kDomainExpert) metrics_ = {MetricKind::kSpd};
}

Session::~Session() { wait_for_jobs(); }

std::uint64_t Session::version() const {
  std::shared_lock lock(mu_);
  return version_;
}

bool Session::ready() const {
  std::shared_lock lock(mu_);
  return steps_done_ == wizard_steps(role_).size();
}

void Session::set_persist_dir(std::filesystem::path dir) {
  std::unique_lock lock(mu_);
  persist_dir_ = std::move(dir);
  persist();
}

// ---- helpers (mu_ held) ----

void Session::require_step(WizardStep step) const {
  const auto steps = wizard_steps(role_);
  const auto it = std::find(steps.begin(), steps.end(), step);
  if (it == steps.end()) {
    throw Error(ErrorCode::kState,
                "step '" + std::string(to_string(step)) + "' is not part of the " + std::string(to_string(role_)) +
                    " wizard");
  }
  const auto index = static_cast<std::size_t>(it - steps.begin());
  if (steps_done_ < index) {
    const std::string missing(to_string(steps[steps_done_]));
    throw Error(ErrorCode::kState, "missing wizard step '" + missing + "'", "missing_step=" + missing);
  }
}

void Session::complete_step(WizardStep step) {
  const auto steps = wizard_steps(role_);
  const auto index = static_cast<std::size_t>(std::find(steps.begin(), steps.end(), step) - steps.begin());
  steps_done_ = std::max(steps_done_, index + 1);
}

void Session::require_ready() const {
  const auto steps = wizard_steps(role_);
  if (steps_done_ < steps.size()) {
    const std::string missing(to_string(steps[steps_done_]));
    throw Error(ErrorCode::kState, "session not ready: missing wizard step '" + missing + "'",
                "missing_step=" + missing);
  }
}

std::shared_ptr<const TrainedModel> Session::require_model(View view) const {
  if (view == View::kModel && !model_) {
    throw Error(ErrorCode::kState, "model view needs a trained model", "missing_step=train");
  }
  return model_;
}

std::uint64_t Session::bump() {
  ++version_;
  persist();
  return version_;
}

void Session::invalidate_model() {
  model_.reset();
  trained_seed_.reset();
  ++model_generation_;
}

void Session::rebuild_working_table() {
  if (!base_ || !target_) {
    working_.reset();
    return;
  }
  DataTable t = base_->with_target(target_->first, target_->second);
  for (const auto& c : custom_metrics_) {
    const auto def = expr::make_custom_metric(c.name, c.source_text, t);
    const auto derived = expr::evaluate_column(expr::bind(def.ast, t), t, def.name, config_.k_max);
    t = t.with_column(derived.column);
  }
  working_ = std::make_shared<const DataTable>(std::move(t));
}

StructureConfig Session::structure_config() const {
  StructureConfig c;
  c.l1_penalty = config_.lambda;
  c.edge_threshold = config_.omega;
  return c;
}

std::string Session::fingerprint() const {
  std::uint64_t h = fnv1a(to_csv(*working_));
  char buf[160];
  std::snprintf(buf, sizeof buf, "|%.17g|%.17g|%zu|", config_.omega, config_.lambda, config_.k_max);
  h = fnv1a(buf, h);
  h = fnv1a(working_->target() + "|" + working_->positive_label(), h);
  return hex64(h);
}

std::shared_ptr<const CausalGraph> Session::base_graph() const {
  const std::string fp = fingerprint();
  std::lock_guard lock(graph_mu_);
  if (graph_ && graph_->meta.fingerprint == fp) return graph_;
  CausalGraph g = build_causal_graph(*working_, structure_config(), config_.k_max);
  g.meta.fingerprint = fp;
  graph_ = std::make_shared<const CausalGraph>(std::move(g));
  return graph_;
}

std::shared_ptr<const SimilarityIndex> Session::similarity_index() const {
  std::lock_guard lock(sim_mu_);
  // Model features skip derived columns, so custom metrics leave this valid.
  if (!similarity_) similarity_ = std::make_shared<const SimilarityIndex>(*working_);
  return similarity_;
}

std::set<std::string> Session::combination_ids() const {
  std::set<std::string> ids;
  for (const auto& c : combinations_) ids.insert(c.id);
  return ids;
}

void Session::check_feature(const std::string& feature) const {
  if (!working_->find(feature)) {
    throw Error(ErrorCode::kNotFound, "unknown feature '" + feature + "'",
                "available: " + join_names(working_->column_names()));
  }
}

std::size_t Session::check_row(std::size_t row) const {
  if (row >= working_->rows()) {
    throw Error(ErrorCode::kNotFound, "unknown application id " + std::to_string(row),
                "rows=" + std::to_string(working_->rows()));
  }
  return row;
}

GroupSpec Session::designation(const std::string& feature) const {
  const auto it = privileged_.find(feature);
  if (it != privileged_.end()) return GroupSpec{feature, it->second};
  return default_privileged(*working_, feature, config_.k_max);
}

std::vector<SensitiveDesignation> Session::designations() const {
  std::vector<SensitiveDesignation> out;
  for (const auto& f : sensitive_) {
    const GroupSpec g = designation(f);
    out.push_back(SensitiveDesignation{f, g.privileged, privileged_.count(f) > 0});
  }
  return out;
}

Outcomes Session::view_outcomes(View view) const {
  if (view == View::kModel) return require_model(view)->outcomes;
  return working_->outcomes();
}

Json Session::row_values(std::size_t row) const {
  Json values = Json::object();
  for (const auto& col : working_->columns()) values[col.name()] = cell_json(col, row);
  return values;
}

void Session::persist() const {
  if (persist_dir_.empty()) return;
  std::filesystem::create_directories(persist_dir_);
  const auto final_path = persist_dir_ / (id_ + ".json");
  const auto tmp = persist_dir_ / (id_ + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInternal, "cannot write session snapshot", tmp.string());
    out << snapshot_unlocked().dump(2) << "\n";
  }
  std::filesystem::rename(tmp, final_path);
}

// ---- wizard ----

std::uint64_t Session::set_dataset(DatasetSource source) {
  std::unique_lock lock(mu_);
  auto table = load_source(source, config_);
  if (!persist_dir_.empty() && source.kind == DatasetSource::Kind::kUpload) {
    std::filesystem::create_directories(persist_dir_);
    std::ofstream out(persist_dir_ / (id_ + ".csv"), std::ios::binary | std::ios::trunc);
    out << source.csv;
  }
  if (source.kind == DatasetSource::Kind::kSynth) source.csv.clear();
  source_ = std::move(source);
  base_ = std::move(table);
  target_.reset();
  sensitive_.clear();
  privileged_.clear();
  metrics_.clear();
  if (role_ == Role::kDomainExpert) metrics_ = {MetricKind::kSpd};
  custom_metrics_.clear();
  unfair_features_.clear();
  unfair_subgroups_.clear();
  combinations_.clear();
  selected_.reset();
  working_.reset();
  invalidate_model();
  {
    std::lock_guard g(graph_mu_);
    graph_.reset();
  }
  {
    std::lock_guard g(sim_mu_);
    similarity_.reset();
  }
  steps_done_ = 1;
  return bump();
}

std::uint64_t Session::set_target(const std::string& feature, const std::string& positive) {
  std::unique_lock lock(mu_);
  require_step(WizardStep::kTarget);
  (void)base_->with_target(feature, positive);  // validates
  const auto previous = target_;
  const auto previous_custom = custom_metrics_;
  target_ = std::make_pair(feature, positive);
  try {
    rebuild_working_table();
  } catch (...) {
    target_ = previous;
    rebuild_working_table();
    throw;
  }
  sensitive_.erase(feature);
  privileged_.erase(feature);
  unfair_features_.erase(feature);
  invalidate_model();
  {
    std::lock_guard g(sim_mu_);
    similarity_.reset();
  }
  complete_step(WizardStep::kTarget);
  return bump();
}

std::uint64_t Session::set_model(const ModelSettings& settings) {
  std::unique_lock lock(mu_);
  require_step(WizardStep::kModel);
  if (settings.family != "logistic") {
    throw Error(ErrorCode::kValidation, "unknown model family '" + settings.family + "'", "available: logistic");
  }
  if (!std::isfinite(settings.l2) || settings.l2 < 0) throw Error(ErrorCode::kValidation, "l2 must be >= 0");
  if (!(settings.test_fraction > 0.0 && settings.test_fraction < 1.0)) {
    throw Error(ErrorCode::kValidation, "test_fraction must be in (0, 1)");
  }
  model_settings_ = settings;
  invalidate_model();
  complete_step(WizardStep::kModel);
  return bump();
}

std::uint64_t Session::set_sensitive(const std::vector<std::string>& features,
                                     const std::map<std::string, std::vector<std::string>>& privileged) {
  std::unique_lock lock(mu_);
  require_step(WizardStep::kSensitive);
  std::set<std::string> chosen;
  for (const auto& f : features) {
    (void)working_->column(f);  // kValidation listing the columns
    if (f == working_->target()) throw Error(ErrorCode::kValidation, "the target cannot be a sensitive feature");
    chosen.insert(f);
  }
  for (const auto& [f, values] : privileged) {
    if (!chosen.count(f)) {
      throw Error(ErrorCode::kValidation, "privileged values given for '" + f + "', which is not marked sensitive");
    }
    (void)resolve_group(*working_, GroupSpec{f, values}, config_.k_max);
  }
  sensitive_ = std::move(chosen);
  privileged_ = privileged;
  complete_step(WizardStep::kSensitive);
  return bump();
}

std::uint64_t Session::set_metrics(const std::vector<std::string>& kinds, const std::vector<CustomMetricSource>& custom) {
  std::unique_lock lock(mu_);
  require_step(WizardStep::kMetrics);
  if (kinds.empty() && custom.empty()) {
    throw Error(ErrorCode::kValidation, "choose at least one metric kind or custom metric");
  }
  std::vector<MetricKind> parsed;
  for (const auto& k : kinds) {
    const MetricKind m = parse_metric_kind(k);
    if (std::find(parsed.begin(), parsed.end(), m) == parsed.end()) parsed.push_back(m);
  }
  const auto previous = custom_metrics_;
  custom_metrics_ = custom;
  try {
    rebuild_working_table();
  } catch (...) {
    custom_metrics_ = previous;
    rebuild_working_table();
    throw;
  }
  metrics_ = std::move(parsed);
  complete_step(WizardStep::kMetrics);
  return bump();
}

std::uint64_t Session::confirm() {
  std::unique_lock lock(mu_);
  require_step(WizardStep::kReview);
  complete_step(WizardStep::kReview);
  return bump();
}

// ---- mutations ----

std::uint64_t Session::set_sensitive_flag(const std::string& feature, bool value) {
  std::unique_lock lock(mu_);
  require_ready();
  check_feature(feature);
  if (feature == working_->target()) throw Error(ErrorCode::kValidation, "the target cannot be a sensitive feature");
  if (value) {
    sensitive_.insert(feature);
  } else {
    sensitive_.erase(feature);
    privileged_.erase(feature);
  }
  return bump();
}

std::uint64_t Session::set_unfair_feature(const std::string& feature, bool value) {
  std::unique_lock lock(mu_);
  require_ready();
  check_feature(feature);
  if (feature == working_->target()) throw Error(ErrorCode::kValidation, "the target cannot be flagged");
  if (value) {
    unfair_features_.insert(feature);
  } else {
    unfair_features_.erase(feature);
  }
  return bump();
}

std::uint64_t Session::set_unfair_subgroup(const std::string& id, bool value) {
  std::unique_lock lock(mu_);
  require_ready();
  unfair_subgroups_.set(id, value, combination_ids());
  return bump();
}

std::pair<std::uint64_t, std::string> Session::add_combination(
    std::vector<std::pair<std::string, std::string>> constraints) {
  std::unique_lock lock(mu_);
  require_ready();
  Combination c = make_combination(std::move(constraints), config_.max_constraints);
  std::vector<Constraint> filters;
  for (const auto& [f, v] : c.constraints) filters.push_back(Constraint{f, v});
  (void)filter_rows(*working_, filters, config_.k_max);  // validates names and values
  if (!combination_ids().count(c.id)) combinations_.push_back(c);
  const auto v = bump();
  return {v, c.id};
}

std::uint64_t Session::remove_combination(const std::string& id) {
  std::unique_lock lock(mu_);
  require_ready();
  const auto it = std::find_if(combinations_.begin(), combinations_.end(), [&](const auto& c) { return c.id == id; });
  if (it == combinations_.end()) throw Error(ErrorCode::kNotFound, "unknown combination '" + id + "'");
  combinations_.erase(it);
  unfair_subgroups_.retain(combination_ids());
  return bump();
}

std::uint64_t Session::add_custom_metric(const std::string& name, const std::string& source_text) {
  std::unique_lock lock(mu_);
  require_step(WizardStep::kSensitive);  // needs the target
  custom_metrics_.push_back(CustomMetricSource{name, source_text});
  try {
    rebuild_working_table();
  } catch (...) {
    custom_metrics_.pop_back();
    rebuild_working_table();
    throw;
  }
  return bump();
}

std::uint64_t Session::select_application(std::size_t row) {
  std::unique_lock lock(mu_);
  require_ready();
  selected_ = check_row(row);
  return bump();
}

std::uint64_t Session::train_model(std::optional<std::uint64_t> seed) {
  std::unique_lock lock(mu_);
  require_ready();
  const std::uint64_t s = seed.value_or(model_settings_.seed);
  auto trained = std::make_shared<const TrainedModel>(train_and_evaluate(
      *working_, SplitSpec{s, model_settings_.test_fraction}, TrainConfig{model_settings_.l2}));
  model_ = std::move(trained);
  trained_seed_ = s;
  return bump();
}

// ---- jobs ----

std::string Session::start_job(JobKind kind, std::optional<std::uint64_t> seed) {
  std::shared_ptr<const DataTable> table;
  std::string fp;
  ModelSettings settings;
  std::uint64_t generation = 0;
  {
    std::shared_lock lock(mu_);
    require_ready();
    table = working_;
    fp = fingerprint();
    settings = model_settings_;
    generation = model_generation_;
  }
  std::lock_guard jl(jobs_mu_);
  const std::string job_id = "job-" + std::to_string(++job_counter_);
  jobs_[job_id] = Job{kind, "running", nullptr, 0};
  const StructureConfig structure = structure_config();
  threads_.emplace_back([this, job_id, kind, seed, table, fp, settings, generation, structure] {
    Json error;
    std::uint64_t installed = 0;
    try {
      if (kind == JobKind::kGraph) {
        std::lock_guard g(graph_mu_);
        if (!graph_ || graph_->meta.fingerprint != fp) {
          CausalGraph graph = build_causal_graph(*table, structure, config_.k_max);
          graph.meta.fingerprint = fp;
          graph_ = std::make_shared<const CausalGraph>(std::move(graph));
        }
      } else {
        const std::uint64_t s = seed.value_or(settings.seed);
        auto trained = std::make_shared<const TrainedModel>(
            train_and_evaluate(*table, SplitSpec{s, settings.test_fraction}, TrainConfig{settings.l2}));
        std::unique_lock lock(mu_);
        if (model_generation_ != generation || working_ != table) {
          throw Error(ErrorCode::kState, "session changed while training; result discarded");
        }
        model_ = std::move(trained);
        trained_seed_ = s;
        installed = bump();
      }
    } catch (const Error& e) {
      error = Json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"detail", e.detail()}};
    } catch (const std::exception& e) {
      error = Json{{"code", "internal_error"}, {"message", e.what()}, {"detail", ""}};
    }
    std::lock_guard jl2(jobs_mu_);
    Job& job = jobs_[job_id];
    job.status = error.is_null() ? "succeeded" : "failed";
    job.error = error;
    job.installed_version = installed;
  });
  return job_id;
}

Json Session::job_status(const std::string& job_id) const {
  std::lock_guard jl(jobs_mu_);
  const auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::kNotFound, "unknown job '" + job_id + "'");
  const Job& j = it->second;
  Json out{{"id", job_id},
           {"kind", j.kind == JobKind::kGraph ? "graph" : "train"},
           {"status", j.status},
           {"error", j.error}};
  if (j.installed_version) out["version"] = j.installed_version;
  return out;
}

void Session::wait_for_jobs() {
  std::vector<std::jthread> running;
  {
    std::lock_guard jl(jobs_mu_);
    running.swap(threads_);
  }
  for (auto& t : running) {
    if (t.joinable()) t.join();
  }
}

// ---- reads ----

Json Session::describe() const {
  std::shared_lock lock(mu_);
  const auto steps = wizard_steps(role_);
  Json step_list = Json::array();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    step_list.push_back(Json{{"name", std::string(to_string(steps[i]))}, {"done", i < steps_done_}});
  }
  Json dataset = nullptr;
  if (source_) {
    dataset = Json{{"kind", source_->kind == DatasetSource::Kind::kSynth ? "synth" : "upload"},
                   {"rows", base_->rows()},
                   {"columns", base_->cols()}};
    if (source_->kind == DatasetSource::Kind::kSynth) dataset["seed"] = source_->seed;
  }
  Json metrics = Json::array();
  for (const auto m : metrics_) metrics.push_back(std::string(to_string(m)));
  Json custom = Json::array();
  for (const auto& c : custom_metrics_) custom.push_back(Json{{"name", c.name}, {"source_text", c.source_text}});
  Json combos = Json::array();
  for (const auto& c : combinations_) combos.push_back(to_json(c));
  return Json{{"id", id_},
              {"role", std::string(to_string(role_))},
              {"version", version_},
              {"ready", steps_done_ == steps.size()},
              {"steps", step_list},
              {"step_count", steps.size()},
              {"dataset", dataset},
              {"target", target_ ? Json(target_->first) : Json(nullptr)},
              {"positive_label", target_ ? Json(target_->second) : Json(nullptr)},
              {"sensitive", sensitive_},
              {"privileged", privileged_},
              {"metrics", metrics},
              {"custom_metrics", custom},
              {"unfair_features", unfair_features_},
              {"unfair_subgroups", unfair_subgroups_.ids()},
              {"combinations", combos},
              {"selected", selected_ ? Json(*selected_) : Json(nullptr)},
              {"model",
               {{"family", model_settings_.family},
                {"l2", model_settings_.l2},
                {"seed", model_settings_.seed},
                {"test_fraction", model_settings_.test_fraction},
                {"trained", model_ != nullptr},
                {"trained_seed", trained_seed_ ? Json(*trained_seed_) : Json(nullptr)}}}};
}

Json Session::overview(View view) const {
  std::shared_lock lock(mu_);
  require_ready();
  const DataTable& t = *working_;
  Json columns = Json::array();
  for (const auto& s : t.schema()) columns.push_back(to_json(s));
  const std::size_t positives = t.positive_count();
  Json out{{"view", std::string(to_string(view))},
           {"instances", t.rows()},
           {"features", t.features().size()},
           {"target", t.target()},
           {"positive_label", t.positive_label()},
           {"negative_label", t.negative_label()},
           {"positives", positives},
           {"negatives", t.rows() - positives},
           {"acceptance_rate", static_cast<double>(positives) / static_cast<double>(t.rows())},
           {"columns", columns}};
  if (view == View::kModel) {
    const auto m = require_model(view);
    std::size_t known = 0, pos = 0;
    for (const auto r : m->split.test) {
      if (m->outcomes[r] == kUnknownOutcome) continue;
      ++known;
      pos += m->outcomes[r] == 1 ? 1 : 0;
    }
    // Model overview is computed on the held-out rows.
    out["instances"] = m->split.test.size();
    out["positives"] = pos;
    out["negatives"] = known - pos;
    out["acceptance_rate"] = known ? Json(static_cast<double>(pos) / static_cast<double>(known)) : Json(nullptr);
    out["undefined_predictions"] = m->split.test.size() - known;
    out["accuracy"] = m->test_accuracy;
    out["train_rows"] = m->split.train.size();
  }
  return out;
}

Json Session::graph(View view, const std::vector<std::string>& keep) const {
  std::shared_lock lock(mu_);
  require_ready();
  const auto model = require_model(view);
  CausalGraph g = *base_graph();
  std::map<std::string, double> importance;
  if (model) {
    for (const auto& [f, v] : feature_importance(model->artifact)) importance[f] = v;
  }
  for (auto& n : g.nodes) {
    n.sensitive = sensitive_.count(n.feature) > 0;
    n.unfair = unfair_features_.count(n.feature) > 0;
    if (view == View::kModel) {
      n.bars = summarize_feature(*working_, n.feature, std::span<const std::int8_t>(model->outcomes), config_.k_max)
                   .groups;
      n.spd_range = n.target ? 0.0 : spd_range(*working_, n.feature, model->outcomes, config_.k_max);
      const auto it = importance.find(n.feature);
      if (it != importance.end()) n.importance = it->second;
    }
  }
  if (!keep.empty()) g = drill_down(g, std::set<std::string>(keep.begin(), keep.end()));
  Json out = to_json(g);
  out["view"] = std::string(to_string(view));
  return out;
}

Json Session::feature_info(const std::string& feature, View view) const {
  std::shared_lock lock(mu_);
  require_ready();
  check_feature(feature);
  const auto model = require_model(view);
  const DataTable& t = *working_;
  const Outcomes labels = t.outcomes();
  const Outcomes outcomes = view_outcomes(view);
  const auto graph = base_graph();
  const GraphNode* node = graph->find(feature);
  const Column& col = t.column(feature);
  const bool is_target = feature == t.target();

  Json out{{"feature", feature},
           {"view", std::string(to_string(view))},
           {"schema", to_json(col.schema())},
           {"summary", to_json(summarize_feature(t, feature, std::span<const std::int8_t>(outcomes), config_.k_max))},
           {"in_degree", node ? node->in_degree : 0},
           {"out_degree", node ? node->out_degree : 0},
           {"spd_range", is_target ? 0.0 : spd_range(t, feature, outcomes, config_.k_max)},
           {"sensitive", sensitive_.count(feature) > 0},
           {"unfair", unfair_features_.count(feature) > 0},
           {"target", is_target},
           {"derived_from", col.derived_from() ? Json(*col.derived_from()) : Json(nullptr)},
           {"privileged", nullptr},
           {"privileged_source", nullptr},
           {"metrics", Json::array()}};
  if (view == View::kModel) {
    out["importance"] = nullptr;
    for (const auto& [f, v] : feature_importance(model->artifact)) {
      if (f == feature) out["importance"] = v;
    }
  }
  if (!is_target) {
    try {
      const GroupSpec g = designation(feature);
      MetricContext ctx{t, view, outcomes, labels, config_.k_max};
      Json metrics = Json::array();
      for (const auto& m : metric_suite(ctx, g, metrics_)) metrics.push_back(to_json(m));
      out["privileged"] = g.privileged;
      out["privileged_source"] = privileged_.count(feature) ? "user" : "default";
      out["metrics"] = metrics;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kValidation) throw;
      out["metrics_unavailable"] = e.what();
    }
  }
  return out;
}

Json Session::relationship(const std::string& cause, const std::string& effect, View view) const {
  std::shared_lock lock(mu_);
  require_ready();
  check_feature(cause);
  check_feature(effect);
  if (cause == effect) throw Error(ErrorCode::kValidation, "cause and effect must differ");
  const auto model = require_model(view);
  const DataTable& t = *working_;
  const Grouping gc = group_rows(t, cause, config_.k_max);
  const Grouping ge = group_rows(t, effect, config_.k_max);

  // In the model view the target's value is the prediction on held-out rows.
  auto group_of = [&](const Grouping& g, std::size_t r) -> int {
    if (view == View::kModel && g.feature == t.target()) {
      const auto o = model->outcomes[r];
      return *g.find_label(o == 1 ? t.positive_label() : t.negative_label());
    }
    return g.group_of_row[r];
  };
  std::vector<std::size_t> rows;
  if (view == View::kModel) {
    for (const auto r : model->split.test) {
      if (model->outcomes[r] != kUnknownOutcome) rows.push_back(r);
    }
  } else {
    rows.resize(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) rows[r] = r;
  }
  std::vector<std::vector<std::size_t>> counts(gc.size(), std::vector<std::size_t>(ge.size(), 0));
  for (const auto r : rows) {
    const int a = group_of(gc, r);
    const int b = group_of(ge, r);
    if (a < 0 || b < 0) continue;
    ++counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
  Json groups = Json::array();
  for (std::size_t i = 0; i < gc.size(); ++i) {
    std::size_t total = 0;
    for (const auto c : counts[i]) total += c;
    Json segments = Json::array();
    for (std::size_t j = 0; j < ge.size(); ++j) {
      const double pct = total ? 100.0 * static_cast<double>(counts[i][j]) / static_cast<double>(total) : 0.0;
      segments.push_back(Json{{"value", ge.labels[j]}, {"count", counts[i][j]}, {"percent", pct}});
    }
    groups.push_back(Json{{"value", gc.labels[i]}, {"count", total}, {"segments", segments}});
  }
  Json edge = nullptr;
  for (const auto& e : base_graph()->edges) {
    if ((e.src == cause && e.dst == effect) || (e.src == effect && e.dst == cause)) {
      edge = Json{{"src", e.src}, {"dst", e.dst}, {"strength", e.strength}};
    }
  }
  return Json{{"cause", cause}, {"effect", effect}, {"view", std::string(to_string(view))}, {"edge", edge},
              {"groups", groups}};
}

Json Session::combinations(View view) const {
  std::shared_lock lock(mu_);
  require_ready();
  const Outcomes outcomes = view_outcomes(view);
  std::vector<SubgroupCard> cards;
  for (const auto& c : combinations_) {
    SubgroupCard card = build_card(*working_, c, outcomes, config_.max_constraints, config_.k_max);
    card.unfair = unfair_subgroups_.get(c.id);
    cards.push_back(std::move(card));
  }
  cards = order_cards(std::move(cards));
  Json list = Json::array();
  std::size_t hidden = 0;
  for (const auto& c : cards) {
    if (c.member_count < config_.min_support) {
      ++hidden;
      continue;
    }
    list.push_back(to_json(c));
  }
  return Json{{"view", std::string(to_string(view))}, {"cards", list}, {"hidden", hidden},
              {"min_support", config_.min_support}};
}

Json Session::dataset_page(const PageQuery& q) const {
  std::shared_lock lock(mu_);
  require_ready();
  const auto model = require_model(q.view);
  if (q.page == 0 || q.page_size == 0 || q.page_size > 1000) {
    throw Error(ErrorCode::kValidation, "page starts at 1 and page_size must be in [1, 1000]");
  }
  const DataTable& t = *working_;
  std::vector<std::size_t> rows = filter_rows(t, q.filters, config_.k_max);

  if (!q.sort.empty() && q.sort != "id") {
    // Sort key per row; nullopt sorts last in either direction.
    std::vector<std::optional<double>> key(t.rows());
    if (q.sort == "confidence") {
      if (!model) throw Error(ErrorCode::kValidation, "sorting by confidence needs the model view");
      for (std::size_t r = 0; r < t.rows(); ++r) {
        if (model->predictions[r]) key[r] = model->predictions[r]->confidence;
      }
    } else {
      const auto idx = t.find(q.sort);
      if (!idx) {
        throw Error(ErrorCode::kValidation, "unknown sort column '" + q.sort + "'",
                    "available: id, confidence, " + join_names(t.column_names()));
      }
      const Column& col = t.column(*idx);
      for (std::size_t r = 0; r < t.rows(); ++r) {
        if (col.is_missing(r)) continue;
        key[r] = col.is_numeric() ? col.number(r) : static_cast<double>(col.code(r));
      }
    }
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      if (!key[a] || !key[b]) return key[a].has_value() && !key[b].has_value();
      return q.descending ? *key[a] > *key[b] : *key[a] < *key[b];
    });
  } else if (q.descending) {
    std::reverse(rows.begin(), rows.end());
  }

  const std::size_t total = rows.size();
  const std::size_t pages = (total + q.page_size - 1) / q.page_size;
  Json page_rows = Json::array();
  const std::size_t begin = std::min(total, (q.page - 1) * q.page_size);
  const std::size_t end = std::min(total, begin + q.page_size);
  const Column& target = t.column(t.target());
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t r = rows[i];
    Json row{{"id", r}, {"values", row_values(r)}, {"target", target.label(r)}};
    if (model) {
      row["prediction"] = model->predictions[r] ? to_json(*model->predictions[r]) : Json(nullptr);
      row["split"] = std::binary_search(model->split.test.begin(), model->split.test.end(), r) ? "test" : "train";
    }
    page_rows.push_back(std::move(row));
  }
  return Json{{"view", std::string(to_string(q.view))},
              {"total", total},
              {"page", q.page},
              {"page_size", q.page_size},
              {"pages", pages},
              {"rows", page_rows}};
}

Json Session::application(std::size_t row, View view) const {
  std::shared_lock lock(mu_);
  require_ready();
  check_row(row);
  const auto model = require_model(view);
  const DataTable& t = *working_;
  Json out{{"id", row},
           {"view", std::string(to_string(view))},
           {"values", row_values(row)},
           {"target", t.column(t.target()).label(row)},
           {"selected", selected_ && *selected_ == row}};
  if (view == View::kModel) {
    out["prediction"] = model->predictions[row] ? to_json(*model->predictions[row]) : Json(nullptr);
    const auto c = contributions(model->artifact, t, row);
    out["contributions"] = c ? to_json(*c) : Json(nullptr);
    out["split"] = std::binary_search(model->split.test.begin(), model->split.test.end(), row) ? "test" : "train";
  }
  return out;
}

Json Session::scatter(std::optional<std::size_t> row, View view) const {
  std::shared_lock lock(mu_);
  require_ready();
  const auto model = require_model(view);
  if (!row) row = selected_;
  if (!row) throw Error(ErrorCode::kState, "no application selected", "missing_step=select");
  check_row(*row);
  const auto index = similarity_index();
  std::span<const std::optional<Prediction>> preds;
  if (model) preds = model->predictions;
  return to_json(fairhil::scatter(*index, *working_, *row, view, preds));
}

Json Session::compare(std::size_t a, std::size_t b) const {
  std::shared_lock lock(mu_);
  require_ready();
  check_row(a);
  check_row(b);
  return to_json(compare_pair(*working_, a, b));
}

Json Session::model_json() const {
  std::shared_lock lock(mu_);
  require_ready();
  const auto model = require_model(View::kModel);
  Json out = model_to_json(model->artifact);
  out["seed"] = model->spec.seed;
  out["test_fraction"] = model->spec.test_fraction;
  out["test_accuracy"] = model->test_accuracy;
  return out;
}

Json Session::export_report() const {
  std::shared_lock lock(mu_);
  require_ready();
  const auto graph = base_graph();
  ReportInputs in;
  in.table = working_.get();
  in.graph = graph.get();
  in.model = model_.get();
  in.role = std::string(to_string(role_));
  if (source_->kind == DatasetSource::Kind::kSynth) {
    in.dataset_source = Json{{"kind", "synth"}, {"seed", source_->seed}, {"rows", source_->rows}};
  } else {
    in.dataset_source = Json{{"kind", "upload"}};
  }
  in.model_settings = Json{{"family", model_settings_.family},
                           {"l2", model_settings_.l2},
                           {"seed", trained_seed_ ? *trained_seed_ : model_settings_.seed},
                           {"test_fraction", model_settings_.test_fraction}};
  in.sensitive = designations();
  in.metrics = metrics_;
  in.custom_metrics = custom_metrics_;
  in.unfair_features = unfair_features_;
  for (const auto& c : combinations_) {
    if (unfair_subgroups_.get(c.id)) in.unfair_subgroups.push_back(c);
  }
  in.config = config_;
  in.structure = structure_config();
  return build_report(in);
}

// ---- persistence ----

Json Session::snapshot() const {
  std::shared_lock lock(mu_);
  return snapshot_unlocked();
}

Json Session::snapshot_unlocked() const {
  Json source = nullptr;
  if (source_) {
    if (source_->kind == DatasetSource::Kind::kSynth) {
      source = Json{{"kind", "synth"}, {"seed", source_->seed}, {"rows", source_->rows}};
    } else if (persist_dir_.empty()) {
      source = Json{{"kind", "upload"}, {"csv", source_->csv}};
    } else {
      source = Json{{"kind", "upload"}, {"csv_file", id_ + ".csv"}};
    }
  }
  Json metrics = Json::array();
  for (const auto m : metrics_) metrics.push_back(std::string(to_string(m)));
  Json custom = Json::array();
  for (const auto& c : custom_metrics_) custom.push_back(Json{{"name", c.name}, {"source_text", c.source_text}});
  Json combos = Json::array();
  for (const auto& c : combinations_) combos.push_back(to_json(c));
  return Json{{"id", id_},
              {"role", std::string(to_string(role_))},
              {"version", version_},
              {"steps_done", steps_done_},
              {"source", source},
              {"target", target_ ? Json(target_->first) : Json(nullptr)},
              {"positive_label", target_ ? Json(target_->second) : Json(nullptr)},
              {"model_settings",
               {{"family", model_settings_.family},
                {"l2", model_settings_.l2},
                {"seed", model_settings_.seed},
                {"test_fraction", model_settings_.test_fraction}}},
              {"sensitive", sensitive_},
              {"privileged", privileged_},
              {"metrics", metrics},
              {"custom_metrics", custom},
              {"unfair_features", unfair_features_},
              {"unfair_subgroups", unfair_subgroups_.ids()},
              {"combinations", combos},
              {"selected", selected_ ? Json(*selected_) : Json(nullptr)},
              {"trained_seed", trained_seed_ ? Json(*trained_seed_) : Json(nullptr)}};
}

std::unique_ptr<Session> Session::restore(const Json& j, const Config& config, const std::filesystem::path& dir) {
  try {
    auto s = std::make_unique<Session>(j.at("id").get<std::string>(), parse_role(j.at("role").get<std::string>()),
                                       config);
    std::unique_lock lock(s->mu_);
    s->persist_dir_ = dir;
    const Json& src = j.at("source");
    if (!src.is_null()) {
      DatasetSource ds;
      if (src.at("kind") == "synth") {
        ds.kind = DatasetSource::Kind::kSynth;
        ds.seed = src.at("seed").get<std::uint64_t>();
        ds.rows = src.at("rows").get<std::size_t>();
      } else {
        ds.kind = DatasetSource::Kind::kUpload;
        if (src.contains("csv")) {
          ds.csv = src.at("csv").get<std::string>();
        } else {
          std::ifstream in(dir / src.at("csv_file").get<std::string>(), std::ios::binary);
          if (!in) throw Error(ErrorCode::kNotFound, "snapshot upload file missing");
          std::stringstream buf;
          buf << in.rdbuf();
          ds.csv = buf.str();
        }
      }
      s->base_ = load_source(ds, config);
      s->source_ = std::move(ds);
    }
    if (!j.at("target").is_null()) {
      s->target_ = std::make_pair(j.at("target").get<std::string>(), j.at("positive_label").get<std::string>());
    }
    const Json& ms = j.at("model_settings");
    s->model_settings_ = ModelSettings{ms.at("family").get<std::string>(), ms.at("l2").get<double>(),
                                       ms.at("seed").get<std::uint64_t>(), ms.at("test_fraction").get<double>()};
    s->sensitive_ = j.at("sensitive").get<std::set<std::string>>();
    s->privileged_ = j.at("privileged").get<std::map<std::string, std::vector<std::string>>>();
    s->metrics_.clear();
    for (const auto& m : j.at("metrics")) s->metrics_.push_back(parse_metric_kind(m.get<std::string>()));
    for (const auto& c : j.at("custom_metrics")) {
      s->custom_metrics_.push_back(CustomMetricSource{c.at("name").get<std::string>(), c.at("source_text").get<std::string>()});
    }
    s->unfair_features_ = j.at("unfair_features").get<std::set<std::string>>();
    for (const auto& c : j.at("combinations")) {
      std::vector<std::pair<std::string, std::string>> cons;
      for (const auto& k : c.at("constraints")) cons.emplace_back(k.at("feature").get<std::string>(), k.at("value").get<std::string>());
      s->combinations_.push_back(make_combination(std::move(cons), config.max_constraints));
    }
    const auto known = s->combination_ids();
    for (const auto& id : j.at("unfair_subgroups")) s->unfair_subgroups_.set(id.get<std::string>(), true, known);
    if (!j.at("selected").is_null()) s->selected_ = j.at("selected").get<std::size_t>();
    s->rebuild_working_table();
    if (!j.at("trained_seed").is_null() && s->working_) {
      const auto seed = j.at("trained_seed").get<std::uint64_t>();
      s->model_ = std::make_shared<const TrainedModel>(train_and_evaluate(
          *s->working_, SplitSpec{seed, s->model_settings_.test_fraction}, TrainConfig{s->model_settings_.l2}));
      s->trained_seed_ = seed;
    }
    s->steps_done_ = j.at("steps_done").get<std::size_t>();
    s->version_ = j.at("version").get<std::uint64_t>();
    lock.unlock();
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchema, "malformed session snapshot", e.what());
  }
}

// ---- manager ----

SessionManager::SessionManager(Config config) : config_(std::move(config)) {
  if (config_.data_dir.empty()) return;
  const std::filesystem::path dir(config_.data_dir);
  std::filesystem::create_directories(dir);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    const Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) continue;
    try {
      std::shared_ptr<Session> s = Session::restore(j, config_, dir);
      sessions_[s->id()] = std::move(s);
    } catch (const Error&) {
      // A snapshot that no longer loads is left on disk untouched.
    }
  }
}

std::shared_ptr<Session> SessionManager::create(Role role) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu_);
  std::string id;
  do {
    id = hex64(rng()).substr(0, 12);
  } while (sessions_.count(id));
  auto s = std::make_shared<Session>(id, role, config_);
  if (!config_.data_dir.empty()) s->set_persist_dir(config_.data_dir);
  sessions_[id] = s;
  return s;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

void SessionManager::remove(const std::string& id) {
  std::lock_guard lock(mu_);
  if (!sessions_.erase(id)) throw Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
  if (!config_.data_dir.empty()) {
    const std::filesystem::path dir(config_.data_dir);
    std::filesystem::remove(dir / (id + ".json"));
    std::filesystem::remove(dir / (id + ".csv"));
  }
}

std::vector<std::string> SessionManager::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

}  // namespace fairhil
