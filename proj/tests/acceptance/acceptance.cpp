// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "dag_gen.hpp"
#include "expr_gen.hpp"
#include "fairhil/api.hpp"
#include "fairhil/causal.hpp"
#include "fairhil/expr.hpp"
#include "fairhil/metrics.hpp"
#include "fairhil/model.hpp"
#include "fairhil/session.hpp"
#include "fairhil/similarity.hpp"
#include "fairhil/summary.hpp"
#include "fairhil/synth.hpp"
#include "json_schema.hpp"
#include "oracles.hpp"

using namespace fairhil;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures; keeps the first few messages.
struct Tally {
  long checks = 0;
  long failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    if (notes.size() < 5) notes.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    const bool ok = std::abs(got - want) <= tol;
    if (!ok) {
      char buf[160];
      std::snprintf(buf, sizeof buf, " got %.17g want %.17g", got, want);
      expect(false, what + buf);
    } else {
      expect(true, what);
    }
  }
  std::string summary() const {
    std::string s = std::to_string(checks - failures) + "/" + std::to_string(checks) + " checks";
    for (const auto& n : notes) s += "; " + n;
    return s;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Row sides from the oracle's own grouping; the engine's labels only name
// which groups are privileged.
std::vector<int> oracle_sides(const DataTable& t, const std::string& f, const std::vector<std::string>& privileged) {
  const auto groups = oracle::groups_of(t.column(f), kDefaultMaxBins);
  const Grouping named = group_rows(t, f);
  std::set<int> priv;
  for (const auto& l : privileged) priv.insert(*named.find_label(l));
  std::vector<int> side(groups.size(), -1);
  for (std::size_t r = 0; r < groups.size(); ++r) {
    if (groups[r] >= 0) side[r] = priv.count(groups[r]) ? 1 : 0;
  }
  return side;
}

Outcomes random_predictions(std::mt19937_64& rng, std::size_t n) {
  Outcomes yhat(n);
  for (auto& v : yhat) v = static_cast<std::int8_t>(rng() % 7 == 0 ? -1 : static_cast<int>(rng() % 2));
  return yhat;
}

void compare_metric(Tally& t, const MetricValue& got, const std::optional<double>& want, double tol,
                    const std::string& what) {
  t.expect(got.defined == want.has_value(), what + " definedness");
  if (got.defined && want) t.near(got.value, *want, tol, what);
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  Tally t;
  for (int trial = 0; trial < 50; ++trial) {
    const DataTable table = oracle::random_table(rng, 10 + rng() % 191, 1 + rng() % 6);
    const Outcomes y = table.outcomes();
    const Outcomes yhat = random_predictions(rng, y.size());
    const std::string tag = "table " + std::to_string(trial);
    compare_metric(t, theil_index(yhat, y), oracle::theil(yhat, y), 1e-9, tag + " theil");
    for (const auto& f : table.features()) {
      const auto groups = oracle::groups_of(table.column(f), kDefaultMaxBins);
      t.near(spd_range(table, f, y), oracle::spd_range(groups, y), 1e-12, tag + " " + f + " spd_range");
      t.near(spd_range(table, f, yhat), oracle::spd_range(groups, yhat), 1e-12, tag + " " + f + " spd_range model");
      const GroupSpec g = default_privileged(table, f);
      GroupMembers m;
      try {
        m = resolve_group(table, g);
      } catch (const Error&) {
        continue;  // only one populated value
      }
      const auto side = oracle_sides(table, f, g.privileged);
      compare_metric(t, spd(y, m, f), oracle::spd(side, y), 1e-12, tag + " " + f + " spd");
      compare_metric(t, spd(yhat, m, f, View::kModel), oracle::spd(side, yhat), 1e-12, tag + " " + f + " spd model");
      compare_metric(t, disparate_impact(y, m, f), oracle::disparate_impact(side, y), 1e-12, tag + " " + f + " di");
      compare_metric(t, disparate_impact(yhat, m, f, View::kModel), oracle::disparate_impact(side, yhat), 1e-12,
                     tag + " " + f + " di model");
      compare_metric(t, equal_opportunity_diff(yhat, y, m, f), oracle::eq_opp(side, yhat, y), 1e-12,
                     tag + " " + f + " eq_opp");
      compare_metric(t, average_odds_diff(yhat, y, m, f), oracle::avg_odds(side, yhat, y), 1e-12,
                     tag + " " + f + " avg_odds");
    }
  }
  const double secs = seconds_since(t0);
  t.expect(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  return {t.failures == 0, t.summary() + ", " + fmt("%.2f s", secs)};
}

DataTable permuted(const DataTable& t, const std::vector<std::size_t>& perm) {
  std::vector<Column> cols;
  for (const auto& c : t.columns()) {
    if (c.is_numeric()) {
      std::vector<double> v(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) v[i] = c.number(perm[i]);
      cols.push_back(Column::numeric(c.name(), std::move(v)));
    } else {
      std::vector<int> codes(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) codes[i] = c.code(perm[i]);
      cols.push_back(Column::categorical(c.name(), c.levels(), std::move(codes)));
    }
  }
  return DataTable(std::move(cols)).with_target(t.target(), t.positive_label());
}

Outcome metric_algebra() {
  std::mt19937_64 rng(77);
  Tally anti, perm, bounds;
  int anti_cases = 0, perm_cases = 0, bound_cases = 0;

  while (anti_cases < 1000) {
    const DataTable table = oracle::random_table(rng, 10 + rng() % 150, 1);
    const std::string f = "f0";
    const Grouping g = group_rows(table, f);
    if (g.size() < 2) continue;
    std::vector<std::string> a, b;
    for (const auto& l : g.labels) (rng() % 2 ? a : b).push_back(l);
    if (a.empty() || b.empty()) continue;
    GroupMembers ma, mb;
    try {
      ma = resolve_group(table, GroupSpec{f, a});
      mb = resolve_group(table, GroupSpec{f, b});
    } catch (const Error&) {
      continue;
    }
    ++anti_cases;
    const Outcomes y = table.outcomes();
    const Outcomes yhat = random_predictions(rng, y.size());
    const std::string tag = "case " + std::to_string(anti_cases);
    auto check = [&](const MetricValue& x, const MetricValue& z, const char* name) {
      anti.expect(x.defined == z.defined, tag + " " + name + " definedness");
      if (x.defined && z.defined) anti.expect(x.value == -z.value, tag + " " + name);
    };
    check(spd(y, ma, f), spd(y, mb, f), "spd");
    check(equal_opportunity_diff(yhat, y, ma, f), equal_opportunity_diff(yhat, y, mb, f), "eq_opp");
    check(average_odds_diff(yhat, y, ma, f), average_odds_diff(yhat, y, mb, f), "avg_odds");
    const MetricValue da = disparate_impact(y, ma, f), db = disparate_impact(y, mb, f);
    if (da.defined && db.defined && da.value > 0) anti.near(da.value * db.value, 1.0, 1e-12, tag + " di reciprocal");
  }

  while (perm_cases < 1000) {
    const DataTable table = oracle::random_table(rng, 10 + rng() % 150, 1 + rng() % 3);
    std::vector<std::size_t> p(table.rows());
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    const DataTable shuffled = permuted(table, p);
    const Outcomes y = table.outcomes();
    const Outcomes yhat = random_predictions(rng, y.size());
    Outcomes yhat_p(y.size());
    for (std::size_t i = 0; i < p.size(); ++i) yhat_p[i] = yhat[p[i]];
    const Outcomes y_p = shuffled.outcomes();
    ++perm_cases;
    const std::string tag = "case " + std::to_string(perm_cases);
    auto same = [&](const MetricValue& x, const MetricValue& z, const std::string& name) {
      perm.expect(x.defined == z.defined, tag + " " + name + " definedness");
      if (x.defined && z.defined) perm.near(x.value, z.value, 1e-12, tag + " " + name);
    };
    same(theil_index(yhat, y), theil_index(yhat_p, y_p), "theil");
    for (const auto& f : table.features()) {
      perm.near(spd_range(table, f, y), spd_range(shuffled, f, y_p), 1e-12, tag + " " + f + " spd_range");
      const GroupSpec g = default_privileged(table, f);
      GroupMembers m, mp;
      try {
        m = resolve_group(table, g);
        mp = resolve_group(shuffled, g);
      } catch (const Error&) {
        continue;
      }
      same(spd(y, m, f), spd(y_p, mp, f), f + " spd");
      same(disparate_impact(y, m, f), disparate_impact(y_p, mp, f), f + " di");
      same(equal_opportunity_diff(yhat, y, m, f), equal_opportunity_diff(yhat_p, y_p, mp, f), f + " eq_opp");
      same(average_odds_diff(yhat, y, m, f), average_odds_diff(yhat_p, y_p, mp, f), f + " avg_odds");
    }
  }

  while (bound_cases < 1000) {
    const DataTable table = oracle::random_table(rng, 2 + rng() % 150, 1 + rng() % 3);
    const Outcomes y = table.outcomes();
    const Outcomes yhat = random_predictions(rng, y.size());
    ++bound_cases;
    const std::string tag = "case " + std::to_string(bound_cases);
    const MetricValue th = theil_index(yhat, y);
    if (th.defined) {
      bounds.expect(th.value >= 0.0 && th.value <= std::log(static_cast<double>(y.size())) + 1e-12, tag + " theil");
    }
    for (const auto& f : table.features()) {
      const double r = spd_range(table, f, y);
      bounds.expect(r >= 0.0 && r <= 1.0, tag + " spd_range");
      GroupMembers m;
      try {
        m = resolve_group(table, default_privileged(table, f));
      } catch (const Error&) {
        continue;
      }
      for (const MetricValue& v : {spd(y, m, f), equal_opportunity_diff(yhat, y, m, f), average_odds_diff(yhat, y, m, f)}) {
        if (v.defined) bounds.expect(v.value >= -1.0 && v.value <= 1.0, tag + " " + std::string(to_string(v.kind)));
      }
      const MetricValue di = disparate_impact(y, m, f);
      if (di.defined) bounds.expect(di.value >= 0.0 && std::isfinite(di.value), tag + " di");
      // Default privileged group has the highest rate: SPD <= 0, DI <= 1.
      const MetricValue s = spd(y, m, f);
      if (s.defined) bounds.expect(s.value <= 1e-15, tag + " default privileged spd sign");
    }
  }

  const bool pass = anti.failures == 0 && perm.failures == 0 && bounds.failures == 0;
  return {pass, "antisymmetry " + anti.summary() + " | permutation " + perm.summary() + " | bounds " +
                    bounds.summary()};
}

Outcome causal_recovery() {
  const StructureConfig cfg;
  int good = 0, empty = 0;
  double worst = 0;
  std::string shds, counts;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = daggen::planted(seed);
    const auto t0 = Clock::now();
    const StructureResult r = learn_structure(p.x, cfg);
    worst = std::max(worst, seconds_since(t0));
    const int shd = daggen::shd(p.b, r.weights, cfg.edge_threshold);
    good += shd <= 2 ? 1 : 0;
    shds += std::to_string(shd) + (seed < 10 ? "," : "");

    const Eigen::MatrixXd x = daggen::independent(seed);
    const auto t1 = Clock::now();
    const StructureResult ri = learn_structure(x, cfg);
    worst = std::max(worst, seconds_since(t1));
    const int edges = daggen::edge_count(ri.weights, cfg.edge_threshold);
    empty += edges == 0 ? 1 : 0;
    counts += std::to_string(edges) + (seed < 10 ? "," : "");
  }
  const bool pass = good >= 8 && empty >= 9 && worst < 60.0;
  return {pass, "planted SHD<=2 on " + std::to_string(good) + "/10 [" + shds + "], independent 0 edges on " +
                    std::to_string(empty) + "/10 [" + counts + "], slowest learn " + fmt("%.2f s", worst)};
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd g(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(w(i, j)));
      Eigen::MatrixXd up = w, down = w;
      up(i, j) += h;
      down(i, j) -= h;
      g(i, j) = (f(up) - f(down)) / (2 * h);
    }
  }
  return g;
}

Outcome acyclicity_analytics() {
  Tally t;
  t.expect(acyclicity(Eigen::MatrixXd::Zero(6, 6)) == 0.0, "h(0) == 0");
  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
  two(0, 1) = 1.0;
  two(1, 0) = 1.0;
  t.near(acyclicity(two), 2.0 * std::cosh(1.0) - 2.0, 1e-9, "2-cycle");

  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 0.5);
  double worst_h = 0, worst_loss = 0;
  for (int point = 0; point < 20; ++point) {
    const int d = 3 + point % 5;
    Eigen::MatrixXd w(d, d);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = g(rng);
    Eigen::MatrixXd x(200, d);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = 2.0 * g(rng);
    const LeastSquaresLoss loss(x);

    const Eigen::MatrixXd gh = acyclicity_with_gradient(w).gradient;
    const Eigen::MatrixXd fh = finite_difference([](const Eigen::MatrixXd& m) { return acyclicity(m); }, w);
    const double eh = relative_error(gh, fh);
    const Eigen::MatrixXd gl = loss(w).gradient;
    const Eigen::MatrixXd fl = finite_difference([&](const Eigen::MatrixXd& m) { return loss(m).value; }, w);
    const double el = relative_error(gl, fl);
    worst_h = std::max(worst_h, eh);
    worst_loss = std::max(worst_loss, el);
    t.expect(eh <= 1e-5, "h gradient at point " + std::to_string(point) + fmt(" rel %.3g", eh));
    t.expect(el <= 1e-5, "loss gradient at point " + std::to_string(point) + fmt(" rel %.3g", el));
  }
  return {t.failures == 0, t.summary() + ", worst relative error h " + fmt("%.2g", worst_h) + ", loss " +
                               fmt("%.2g", worst_loss)};
}

Outcome planted_bias() {
  const auto t0 = Clock::now();
  Session s("acceptance", Role::kDataScientist, Config{});
  DatasetSource src;
  src.kind = DatasetSource::Kind::kSynth;
  src.seed = 42;
  src.rows = 5000;
  s.set_dataset(src);
  s.set_target(kSynthTarget, kSynthPositive);
  s.set_model(ModelSettings{});
  s.set_sensitive({"citizenship"}, {});
  s.set_metrics({"spd"}, {});
  s.train_model();
  const Json report = s.export_report();
  const std::string text = render_report_text(report);
  const double secs = seconds_since(t0);

  std::optional<double> value;
  for (const auto& entry : report["sensitive"]) {
    if (entry["feature"] != "citizenship") continue;
    for (const auto& m : entry["dataset"]) {
      if (m["kind"] == "spd" && m["value"].is_number()) value = m["value"].get<double>();
    }
  }
  bool edge = false;
  for (const auto& e : report["graph"]["edges"]) {
    edge = edge || (e["src"] == "citizenship" && e["dst"] == "credit_risk_level");
  }
  const bool pass = value && std::abs(*value) >= 0.10 && edge && secs < 120.0 && !text.empty();
  return {pass, "SPD(citizenship) " + (value ? fmt("%.4f", *value) : std::string("undefined")) +
                    ", edge citizenship->credit_risk_level " + (edge ? "present" : "missing") + ", " +
                    std::to_string(report["graph"]["edges"].size()) + " edges, pipeline " + fmt("%.1f s", secs)};
}

Outcome model_audit() {
  Tally t;
  {
    const std::size_t n = 80;
    std::vector<double> a(n), b(n);
    std::vector<std::optional<std::string>> y(n);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      const double s = a[i] - 0.5 * b[i];
      if (std::abs(s) < 0.1) a[i] += s >= 0 ? 0.2 : -0.2;  // margin
      y[i] = a[i] - 0.5 * b[i] > 0 ? "yes" : "no";
    }
    const DataTable toy =
        DataTable({Column::numeric("a", a), Column::numeric("b", b), Column::from_labels("y", y)}).with_target("y", "yes");
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    const ModelArtifact m = train_logistic(toy, rows, TrainConfig{1e-6});
    const double acc = accuracy(predicted_outcomes(m, toy, rows), toy.outcomes(), rows);
    t.expect(acc == 1.0, "separable training accuracy " + fmt("%.4f", acc));
  }
  const DataTable table = synth_loans(11, 2000);
  const TrainedModel m = train_and_evaluate(table, SplitSpec{7, 0.2});
  double worst = 0;
  for (std::size_t r = 0; r < 100; ++r) {
    const auto c = contributions(m.artifact, table, r);
    const auto p = predict(m.artifact, table, r);
    if (!c || !p) {
      t.expect(false, "row " + std::to_string(r) + " has no prediction");
      continue;
    }
    double sum = c->intercept;
    for (const auto& f : c->features) sum += f.value;
    worst = std::max(worst, std::abs(sum - p->logit));
    t.expect(std::abs(sum - p->logit) <= 1e-9, "contribution reconstruction row " + std::to_string(r));
  }
  const TrainedModel again = train_and_evaluate(table, SplitSpec{7, 0.2});
  t.expect(again.artifact.weights == m.artifact.weights && again.artifact.intercept == m.artifact.intercept &&
               again.split.test == m.split.test,
           "deterministic retraining");
  const Prediction mid = prediction_from_logit(0.0, "yes", "no");
  t.expect(mid.p == 0.5 && mid.confidence == 0.0, "confidence 0 at p = 0.5");
  const Prediction far = prediction_from_logit(-800.0, "yes", "no");
  t.expect(far.confidence == 1.0, "confidence 1 at p = 0");
  return {t.failures == 0, t.summary() + ", worst reconstruction error " + fmt("%.2g", worst) + ", test accuracy " +
                               fmt("%.3f", m.test_accuracy)};
}

Outcome expression_language() {
  using namespace fairhil::expr;
  Tally t;
  std::mt19937_64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    const auto tree = exprgen::generate(rng, 1 + i % 6);
    const ExprPtr ast = canonicalize(exprgen::to_ast(*tree));
    const std::string text = print(*ast);
    bool ok = false;
    try {
      ok = structurally_equal(*parse(text), *ast) && print(*parse(text)) == text;
    } catch (const Error&) {
      ok = false;
    }
    t.expect(ok, "round trip '" + text + "'");
  }

  // 100 expressions over a 100-row table through bind/evaluate_row.
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Column> cols;
  std::vector<std::vector<std::optional<double>>> values(exprgen::names().size());
  for (std::size_t c = 0; c < exprgen::names().size(); ++c) {
    std::vector<double> v(100);
    values[c].resize(100);
    for (std::size_t r = 0; r < 100; ++r) {
      const int kind = static_cast<int>(rng() % 12);
      if (kind == 0) {
        v[r] = NAN;
      } else {
        v[r] = kind == 1 ? 0.0 : std::round(u(rng) * 4) / 4;
        values[c][r] = v[r];
      }
    }
    cols.push_back(Column::numeric(exprgen::names()[c], v));
  }
  const DataTable table(std::move(cols));
  long evaluations = 0;
  for (int e = 0; e < 100; ++e) {
    const auto tree = exprgen::generate(rng, 4);
    const std::string text = exprgen::render(*tree);
    const BoundExpr bound = bind(parse(text), table);
    for (std::size_t r = 0; r < 100; ++r) {
      std::map<std::string, std::optional<double>> env;
      for (std::size_t c = 0; c < exprgen::names().size(); ++c) env[exprgen::names()[c]] = values[c][r];
      const auto want = exprgen::eval(*tree, env);
      const auto got = bound.evaluate_row(table, r);
      ++evaluations;
      t.expect(got.has_value() == want.has_value() && (!want || *got == *want),
               "evaluation of '" + text + "' row " + std::to_string(r));
    }
  }

  // Malformed inputs: each must raise a ParseError at an offset inside the text.
  const std::vector<std::string> malformed = {
      "", "   ", "1 +", "+", "* 2", "(1 + 2", "1 + 2)", "((a)", "a $ b", "1 2", "a b", "\"abc", "\"", "1 + * 2",
      "()", "(", ")", "1e", "1e+", ".", "1..2", "a / / b", "-", "--", "2 *", "\"a\" \"b\"", "a,b", "#", "1 + (2 * 3",
      "\xC3", "\xE2\x88", "a + \xFF", "1 % 2", "x ^ 2", "[1]", "1 + 2 3", "\"\"", "(())", "a -", "   (   "};
  int positioned = 0;
  for (const auto& text : malformed) {
    try {
      (void)parse(text);
      t.expect(false, "malformed input accepted: '" + text + "'");
    } catch (const ParseError& e) {
      const bool ok = e.offset() <= text.size() && e.code() == ErrorCode::kParse;
      positioned += ok ? 1 : 0;
      t.expect(ok, "positioned error for '" + text + "'");
    } catch (const std::exception& e) {
      t.expect(false, "wrong exception for '" + text + "': " + e.what());
    }
  }
  // Random byte strings and truncated valid expressions: parse or raise a
  // positioned ParseError, nothing else.
  const std::string alphabet = "0123456789abcxyz_.+-*/() \"eE\xC3\x97\xE2\x88\x92\xC3\xB7";
  int fuzz = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string text;
    if (i % 2 == 0) {
      const std::size_t len = rng() % 20;
      for (std::size_t k = 0; k < len; ++k) text += alphabet[rng() % alphabet.size()];
    } else {
      const std::string full = exprgen::render(*exprgen::generate(rng, 3));
      text = full.substr(0, rng() % (full.size() + 1));
    }
    ++fuzz;
    try {
      (void)parse(text);
    } catch (const ParseError& e) {
      t.expect(e.offset() <= text.size(), "fuzz offset for '" + text + "'");
    } catch (const std::exception& e) {
      t.expect(false, "fuzz wrong exception for '" + text + "': " + e.what());
    }
  }
  return {t.failures == 0, t.summary() + " (1000 round trips, " + std::to_string(evaluations) + " evaluations, " +
                               std::to_string(positioned) + "/" + std::to_string(malformed.size()) +
                               " malformed positioned, " + std::to_string(fuzz) + " fuzz inputs)"};
}

Outcome similarity() {
  Tally t;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 2);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t d = 2 + rng() % 40;
    std::vector<double> a(d), b(d);
    for (std::size_t k = 0; k < d; ++k) {
      a[k] = g(rng);
      b[k] = (i % 3 == 0 ? 0.8 * a[k] : 0.0) + g(rng);
    }
    const double s = row_similarity(a, b);
    t.near(s, oracle::pearson(a, b), 1e-12, "oracle case " + std::to_string(i));
    t.expect(s == row_similarity(b, a), "symmetry case " + std::to_string(i));
    t.near(row_similarity(a, a), 1.0, 1e-12, "self case " + std::to_string(i));
    t.expect(s >= -1.0 && s <= 1.0, "bounds case " + std::to_string(i));
  }
  const DataTable table = synth_loans(42, 1000);
  const auto t0 = Clock::now();
  const SimilarityIndex index(table);
  const ScatterData sc = scatter(index, table, 0, View::kDataset);
  const double ms = seconds_since(t0) * 1000.0;
  t.expect(sc.points.size() == 1000, "scatter size");
  t.near(sc.points[0].similarity, 1.0, 1e-12, "scatter self point");
  for (std::size_t r = 0; r < 1000; r += 97) {
    t.expect(sc.points[r].similarity == row_similarity(index.values(r), index.values(0)), "scatter symmetry");
  }
  t.expect(ms < 100.0, "scatter time " + fmt("%.1f ms", ms));
  return {t.failures == 0, t.summary() + ", scatter n=1000 (index + points) " + fmt("%.1f ms", ms)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + FAIRHIL_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome end_to_end() {
  Tally t;
  const fs::path dir = fs::temp_directory_path() / ("fairhil_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "cli.log";
  const fs::path csv = dir / "loans.csv";

  t.expect(run_cli("synth --seed 42 --rows 1000 --out \"" + csv.string() + "\"", log) == 0, "synth exit 0");
  const std::string pipeline = "report --data \"" + csv.string() +
                               "\" --target result --positive accepted --sensitive citizenship,gender "
                               "--metrics spd,disparate_impact,eq_opp_diff,avg_odds_diff,theil --seed 3 --out \"" +
                               (dir / "out").string() + "\"";
  t.expect(run_cli(pipeline, log) == 0, "report exit 0");
  const std::string cli_bytes = read_file(dir / "out" / "report.json");

  // Same session through the HTTP API router.
  Api api{Config{}};
  auto call = [&](const std::string& method, const std::string& path, const Json& body) {
    ApiRequest r;
    r.method = method;
    r.path = path;
    if (!body.is_null()) r.body = body.dump();
    return api.handle(r);
  };
  const ApiResponse created = call("POST", "/api/v1/sessions", Json{{"role", "data_scientist"}});
  const std::string base = "/api/v1/sessions/" + Json::parse(created.body)["id"].get<std::string>();
  const std::vector<std::pair<std::string, Json>> steps = {
      {"/wizard/dataset", Json{{"csv", read_file(csv)}}},
      {"/wizard/target", Json{{"feature", "result"}, {"positive", "accepted"}}},
      {"/wizard/model", Json{{"seed", 3}}},
      {"/wizard/sensitive", Json{{"features", {"citizenship", "gender"}}}},
      {"/wizard/metrics", Json{{"kinds", {"spd", "disparate_impact", "eq_opp_diff", "avg_odds_diff", "theil"}}}},
      {"/train", Json{{"seed", 3}}}};
  for (const auto& [path, body] : steps) {
    const ApiResponse r = call("POST", base + path, body);
    t.expect(r.status == 200, path + " status " + std::to_string(r.status) + " " + r.body);
  }
  const ApiResponse exported = call("GET", base + "/report", nullptr);
  t.expect(exported.status == 200, "report status");
  const Json api_doc = Json::parse(exported.body);
  const std::string api_bytes = api_doc.dump(2) + "\n";
  t.expect(!cli_bytes.empty() && cli_bytes == api_bytes,
           "CLI report.json equals API export (" + std::to_string(cli_bytes.size()) + " vs " +
               std::to_string(api_bytes.size()) + " bytes)");

  std::ifstream schema_in(FAIRHIL_SCHEMA_PATH);
  const schema_check::Validator validator(Json::parse(schema_in));
  const Json cli_doc = Json::parse(cli_bytes, nullptr, false);
  const auto errors = cli_doc.is_discarded() ? std::vector<std::string>{"not JSON"} : validator.validate(cli_doc);
  t.expect(errors.empty(), "schema: " + (errors.empty() ? std::string() : errors.front()));
  t.expect(fs::exists(dir / "out" / "report.txt") && fs::exists(dir / "out" / "graph.json"), "report.txt and graph.json");

  // Exit code contract: 0 ok, 1 usage or validation.
  t.expect(run_cli("report --data \"" + csv.string() + "\" --positive accepted --out x", log) == 1,
           "missing --target exits 1");
  t.expect(run_cli("report --data \"" + (dir / "absent.csv").string() +
                       "\" --target result --positive accepted --out \"" + (dir / "o2").string() + "\"",
                   log) == 1,
           "unreadable data exits 1");
  t.expect(run_cli("report --data \"" + csv.string() + "\" --target nope --positive accepted --out \"" +
                       (dir / "o3").string() + "\"",
                   log) == 1,
           "unknown target exits 1");
  t.expect(run_cli("report --data \"" + csv.string() + "\" --target result --positive accepted --metrics nope --out \"" +
                       (dir / "o4").string() + "\"",
                   log) == 1,
           "unknown metric exits 1");
  t.expect(run_cli("frobnicate", log) == 1, "unknown subcommand exits 1");
  t.expect(run_cli("synth --rows 0", log) == 1, "synth with zero rows exits 1");
  fs::remove_all(dir);
  return {t.failures == 0, t.summary()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", metric_oracle},
      {"metric algebra", metric_algebra},
      {"causal recovery", causal_recovery},
      {"acyclicity analytics", acyclicity_analytics},
      {"planted-bias pipeline", planted_bias},
      {"model audit", model_audit},
      {"expression language", expression_language},
      {"similarity", similarity},
      {"end-to-end headless", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
