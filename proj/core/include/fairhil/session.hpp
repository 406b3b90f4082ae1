#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "fairhil/causal.hpp"
#include "fairhil/config.hpp"
#include "fairhil/data_table.hpp"
#include "fairhil/metrics.hpp"
#include "fairhil/model.hpp"
#include "fairhil/report.hpp"
#include "fairhil/serialize.hpp"
#include "fairhil/similarity.hpp"
#include "fairhil/subgroup.hpp"

namespace fairhil {

enum class Role { kDataScientist, kDomainExpert };
std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view text);

enum class WizardStep { kDataset, kTarget, kModel, kSensitive, kMetrics, kReview };
std::string_view to_string(WizardStep step) noexcept;
// Data scientists: dataset, target, model, sensitive, metrics.
// Domain experts: dataset, target, sensitive, review.
std::vector<WizardStep> wizard_steps(Role role);

struct DatasetSource {
  enum class Kind { kSynth, kUpload } kind = Kind::kSynth;
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  std::string csv;  // upload contents
};

struct ModelSettings {
  std::string family = "logistic";
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

struct PageQuery {
  View view = View::kDataset;
  std::vector<Constraint> filters;
  std::string sort;  // column name, "id" or "confidence"; empty = id
  bool descending = false;
  std::size_t page = 1;  // 1-based
  std::size_t page_size = 50;
};

enum class JobKind { kGraph, kTrain };

// One investigation: wizard state, user marks and engine caches. Reads may
// run concurrently; mutations are serialized and bump `version` by one.
class Session {
 public:
  Session(std::string id, Role role, Config config);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }
  Role role() const noexcept { return role_; }
  std::uint64_t version() const;
  bool ready() const;

  // Snapshots go to `dir` after every mutation when set.
  void set_persist_dir(std::filesystem::path dir);

  // Wizard; each returns the new version.
  std::uint64_t set_dataset(DatasetSource source);
  std::uint64_t set_target(const std::string& feature, const std::string& positive);
  std::uint64_t set_model(const ModelSettings& settings);
  std::uint64_t set_sensitive(const std::vector<std::string>& features,
                              const std::map<std::string, std::vector<std::string>>& privileged);
  std::uint64_t set_metrics(const std::vector<std::string>& kinds, const std::vector<CustomMetricSource>& custom);
  std::uint64_t confirm();

  // Mutations.
  std::uint64_t set_sensitive_flag(const std::string& feature, bool value);
  std::uint64_t set_unfair_feature(const std::string& feature, bool value);
  std::uint64_t set_unfair_subgroup(const std::string& id, bool value);
  std::pair<std::uint64_t, std::string> add_combination(std::vector<std::pair<std::string, std::string>> constraints);
  std::uint64_t remove_combination(const std::string& id);
  std::uint64_t add_custom_metric(const std::string& name, const std::string& source_text);
  std::uint64_t select_application(std::size_t row);
  std::uint64_t train_model(std::optional<std::uint64_t> seed = std::nullopt);

  // Background jobs. Graph jobs fill the graph cache (no version change);
  // train jobs install the model as one mutation.
  std::string start_job(JobKind kind, std::optional<std::uint64_t> seed = std::nullopt);
  Json job_status(const std::string& job_id) const;
  void wait_for_jobs();

  // Reads. Pure functions of the state; caches only change how fast.
  Json describe() const;
  Json overview(View view) const;
  Json graph(View view, const std::vector<std::string>& keep = {}) const;
  Json feature_info(const std::string& feature, View view) const;
  Json relationship(const std::string& cause, const std::string& effect, View view) const;
  Json combinations(View view) const;
  Json dataset_page(const PageQuery& query) const;
  Json application(std::size_t row, View view) const;
  Json scatter(std::optional<std::size_t> row, View view) const;
  Json compare(std::size_t a, std::size_t b) const;
  Json export_report() const;
  Json model_json() const;

  Json snapshot() const;
  static std::unique_ptr<Session> restore(const Json& snapshot, const Config& config,
                                          const std::filesystem::path& dir = {});

 private:
  struct Job {
    JobKind kind;
    std::string status = "running";  // running | succeeded | failed
    Json error;
    std::uint64_t installed_version = 0;
  };

  // Everything below mu_ is guarded by it.
  void require_step(WizardStep step) const;
  void complete_step(WizardStep step);
  void require_ready() const;
  std::shared_ptr<const TrainedModel> require_model(View view) const;
  std::uint64_t bump();
  void rebuild_working_table();
  void invalidate_model();
  void persist() const;
  Json snapshot_unlocked() const;
  std::vector<SensitiveDesignation> designations() const;
  GroupSpec designation(const std::string& feature) const;
  Outcomes view_outcomes(View view) const;
  std::shared_ptr<const CausalGraph> base_graph() const;
  std::shared_ptr<const SimilarityIndex> similarity_index() const;
  StructureConfig structure_config() const;
  std::string fingerprint() const;
  std::set<std::string> combination_ids() const;
  Json row_values(std::size_t row) const;
  std::size_t check_row(std::size_t row) const;
  void check_feature(const std::string& feature) const;

  const std::string id_;
  const Role role_;
  const Config config_;

  mutable std::shared_mutex mu_;
  std::uint64_t version_ = 0;
  std::size_t steps_done_ = 0;
  std::optional<DatasetSource> source_;
  std::optional<std::pair<std::string, std::string>> target_;
  ModelSettings model_settings_;
  std::set<std::string> sensitive_;
  std::map<std::string, std::vector<std::string>> privileged_;
  std::vector<MetricKind> metrics_;
  std::vector<CustomMetricSource> custom_metrics_;
  std::set<std::string> unfair_features_;
  FlagSet unfair_subgroups_;
  std::vector<Combination> combinations_;
  std::optional<std::size_t> selected_;
  std::optional<std::uint64_t> trained_seed_;
  std::filesystem::path persist_dir_;

  std::shared_ptr<const DataTable> base_;
  std::shared_ptr<const DataTable> working_;  // target designated, custom columns appended
  std::shared_ptr<const TrainedModel> model_;
  std::uint64_t model_generation_ = 0;  // bumped when model inputs change

  // Lazily filled; each has its own lock so readers do not serialize.
  mutable std::mutex graph_mu_;
  mutable std::shared_ptr<const CausalGraph> graph_;
  mutable std::mutex sim_mu_;
  mutable std::shared_ptr<const SimilarityIndex> similarity_;

  mutable std::mutex jobs_mu_;
  std::map<std::string, Job> jobs_;
  std::vector<std::jthread> threads_;
  std::size_t job_counter_ = 0;
};

// Owns the sessions of one server process and restores snapshots from
// `config.data_dir` on construction.
class SessionManager {
 public:
  explicit SessionManager(Config config);

  std::shared_ptr<Session> create(Role role);
  std::shared_ptr<Session> get(const std::string& id) const;  // throws kNotFound
  void remove(const std::string& id);
  std::vector<std::string> ids() const;
  const Config& config() const noexcept { return config_; }

 private:
  Config config_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace fairhil
