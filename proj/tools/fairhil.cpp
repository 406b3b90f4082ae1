// fairhil: headless driver. Exit codes: 0 ok, 1 validation/usage, 2 internal.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fairhil/api.hpp"
#include "fairhil/config.hpp"
#include "fairhil/csv.hpp"
#include "fairhil/session.hpp"
#include "fairhil/synth.hpp"

namespace fs = std::filesystem;
using namespace fairhil;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInternal = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kValidation, "cannot write '" + path.string() + "'");
  out << text;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct PipelineArgs {
  std::string data;
  std::string target;
  std::string positive;
  std::string sensitive;
  std::string metrics = "spd";
  std::string config;
  std::uint64_t seed = 0;
  std::optional<double> omega;
  std::optional<double> lambda;
};

Config pipeline_config(const PipelineArgs& a) {
  Config cfg = a.config.empty() ? Config{} : load_config(a.config);
  if (a.omega) cfg.omega = *a.omega;
  if (a.lambda) cfg.lambda = *a.lambda;
  cfg.data_dir.clear();
  return cfg;
}

// Same wizard sequence a data scientist runs through the API.
std::unique_ptr<Session> ready_session(const PipelineArgs& a, const Config& cfg) {
  auto s = std::make_unique<Session>("cli", Role::kDataScientist, cfg);
  DatasetSource src;
  src.kind = DatasetSource::Kind::kUpload;
  src.csv = read_file(a.data);
  s->set_dataset(std::move(src));
  s->set_target(a.target, a.positive);
  ModelSettings ms;
  ms.l2 = cfg.l2;
  ms.seed = a.seed;
  ms.test_fraction = cfg.test_fraction;
  s->set_model(ms);
  s->set_sensitive(split_list(a.sensitive), {});
  s->set_metrics(split_list(a.metrics), {});
  return s;
}

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a) {
  cmd->add_option("--data", a.data, "input CSV")->required();
  cmd->add_option("--target", a.target, "binary target column")->required();
  cmd->add_option("--positive", a.positive, "positive target value")->required();
  cmd->add_option("--config", a.config, "config file (key = value)");
  cmd->add_option("--omega", a.omega, "edge threshold");
  cmd->add_option("--lambda", a.lambda, "structure L1 penalty");
}

int run(int argc, char** argv) {
  CLI::App app{"fairhil: fairness investigation engine"};
  app.require_subcommand(1);

  std::uint64_t synth_seed = 42;
  std::size_t synth_rows = 5000;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate the synthetic loan dataset");
  synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
  synth->add_option("--rows", synth_rows, "number of applications")->capture_default_str();
  synth->add_option("--out", synth_out, "output CSV (stdout when omitted)");

  PipelineArgs rep;
  std::string report_out;
  auto* report = app.add_subcommand("report", "run the pipeline and write report.json, report.txt, graph.json");
  add_pipeline_options(report, rep);
  report->add_option("--sensitive", rep.sensitive, "comma separated sensitive columns");
  report->add_option("--metrics", rep.metrics, "comma separated metric kinds")->capture_default_str();
  report->add_option("--seed", rep.seed, "train/test split seed")->capture_default_str();
  report->add_option("--out", report_out, "output directory")->required();

  PipelineArgs gr;
  std::string graph_out;
  auto* graph = app.add_subcommand("graph", "learn the feature graph and write graph.json");
  add_pipeline_options(graph, gr);
  graph->add_option("--out", graph_out, "output file (stdout when omitted)");

  std::string serve_config;
  std::optional<int> serve_port;
  std::optional<std::string> serve_host;
  auto* serve = app.add_subcommand("serve", "serve the HTTP API under /api/v1");
  serve->add_option("--config", serve_config, "config file (key = value)");
  serve->add_option("--port", serve_port, "override the configured port");
  serve->add_option("--host", serve_host, "override the configured host");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  if (*synth) {
    const DataTable t = synth_loans(synth_seed, synth_rows);
    if (synth_out.empty()) {
      export_csv(t, std::cout);
    } else {
      write_file(synth_out, to_csv(t));
      std::cout << "wrote " << synth_out << " (" << t.rows() << " rows, " << t.cols() << " columns)\n";
    }
    return kExitOk;
  }

  if (*report) {
    const Config cfg = pipeline_config(rep);
    auto s = ready_session(rep, cfg);
    s->train_model(rep.seed);
    const Json doc = s->export_report();
    const fs::path dir(report_out);
    fs::create_directories(dir);
    write_file(dir / "report.json", doc.dump(2) + "\n");
    write_file(dir / "report.txt", render_report_text(doc));
    write_file(dir / "graph.json", s->graph(View::kDataset).dump(2) + "\n");
    std::cout << "wrote " << (dir / "report.json").string() << ", report.txt, graph.json\n";
    std::cout << doc["graph"]["edges"].size() << " edges, " << doc["sensitive"].size() << " sensitive features\n";
    return kExitOk;
  }

  if (*graph) {
    const Config cfg = pipeline_config(gr);
    auto s = ready_session(gr, cfg);
    const std::string text = s->graph(View::kDataset).dump(2) + "\n";
    if (graph_out.empty()) {
      std::cout << text;
    } else {
      write_file(graph_out, text);
      std::cout << "wrote " << graph_out << "\n";
    }
    return kExitOk;
  }

  Config cfg = serve_config.empty() ? Config{} : load_config(serve_config);
  if (serve_port) cfg.port = *serve_port;
  if (serve_host) cfg.host = *serve_host;
  Api api(cfg);
  std::cout << "serving " << kApiPrefix << " on " << cfg.host << ":" << cfg.port << std::endl;
  run_server(api, cfg.host, cfg.port);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what();
    if (!e.detail().empty()) std::cerr << " (" << e.detail() << ")";
    std::cerr << "\n";
    return e.code() == ErrorCode::kInternal ? kExitInternal : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
