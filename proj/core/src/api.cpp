#include "fairhil/api.hpp"

#include <charconv>
#include <vector>

#include "fairhil/data_table.hpp"

namespace fairhil {

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kStructural:
    case ErrorCode::kSchema:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kState:
      return 409;
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

Json error_body(const Error& error) {
  return Json{{"code", std::string(to_string(error.code()))}, {"message", error.what()}, {"detail", error.detail()}};
}

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

class Params {
 public:
  explicit Params(const std::multimap<std::string, std::string>& q) : q_(q) {}

  std::optional<std::string> get(const std::string& key) const {
    const auto it = q_.find(key);
    if (it == q_.end()) return std::nullopt;
    return it->second;
  }
  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    auto [a, b] = q_.equal_range(key);
    for (; a != b; ++a) out.push_back(a->second);
    return out;
  }
  View view() const {
    const auto v = get("view");
    return v ? parse_view(*v) : View::kDataset;
  }
  std::optional<std::size_t> size(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_size(key, *v);
  }

  static std::size_t parse_size(const std::string& what, const std::string& text) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw Error(ErrorCode::kValidation, "'" + what + "' must be a non-negative integer", "got: " + text);
    }
    return value;
  }

 private:
  const std::multimap<std::string, std::string>& q_;
};

Json parse_body(const ApiRequest& req) {
  if (req.body.empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kValidation, "request body is not valid JSON");
  if (!j.is_object()) throw Error(ErrorCode::kValidation, "request body must be a JSON object");
  return j;
}

template <typename T>
T field(const Json& body, const std::string& key) {
  if (!body.contains(key)) throw Error(ErrorCode::kValidation, "missing field '" + key + "'");
  try {
    return body.at(key).get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::kValidation, "field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const Json& body, const std::string& key, T fallback) {
  return body.contains(key) ? field<T>(body, key) : fallback;
}

std::vector<std::pair<std::string, std::string>> constraint_pairs(const Json& body) {
  std::vector<std::pair<std::string, std::string>> out;
  const Json list = field<Json>(body, "constraints");
  if (!list.is_array()) throw Error(ErrorCode::kValidation, "'constraints' must be an array");
  for (const auto& c : list) {
    out.emplace_back(field<std::string>(c, "feature"), field<std::string>(c, "value"));
  }
  return out;
}

// filter=feature=value (value or bin label); range=feature=lo..hi
std::vector<Constraint> page_filters(const Params& p) {
  std::vector<Constraint> out;
  for (const auto& f : p.all("filter")) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kValidation, "filter must be feature=value", "got: " + f);
    out.push_back(Constraint{f.substr(0, eq), f.substr(eq + 1)});
  }
  for (const auto& f : p.all("range")) {
    const auto eq = f.find('=');
    const auto dots = f.find("..", eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || dots == std::string::npos) {
      throw Error(ErrorCode::kValidation, "range must be feature=lo..hi", "got: " + f);
    }
    const auto lo = parse_number(f.substr(eq + 1, dots - eq - 1));
    const auto hi = parse_number(f.substr(dots + 2));
    if (!lo || !hi) throw Error(ErrorCode::kValidation, "range bounds must be numbers", "got: " + f);
    out.push_back(Constraint{f.substr(0, eq), NumericRange{*lo, *hi}});
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= text.size()) {
    const auto j = text.find(',', i);
    const auto end = j == std::string::npos ? text.size() : j;
    if (end > i) out.push_back(text.substr(i, end - i));
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

ApiResponse json_response(const Json& body, int status = 200) { return ApiResponse{status, body.dump(), "application/json"}; }

Json versioned(std::uint64_t version, Json extra = Json::object()) {
  extra["version"] = version;
  return extra;
}

Error not_found(const ApiRequest& req) {
  return Error(ErrorCode::kNotFound, "no route for " + req.method + " " + req.path);
}

ApiResponse session_route(Session& s, const ApiRequest& req, const std::vector<std::string>& seg, const Params& p) {
  const std::string& m = req.method;
  const std::size_t n = seg.size();  // seg[0] = "sessions", seg[1] = id
  if (n == 2 && m == "GET") return json_response(s.describe());

  const std::string& what = seg[2];
  if (what == "wizard" && n == 4 && m == "POST") {
    const std::string& step = seg[3];
    if (step == "dataset") {
      DatasetSource src;
      if (req.content_type.rfind("text/csv", 0) == 0) {
        src.kind = DatasetSource::Kind::kUpload;
        src.csv = req.body;
      } else {
        const Json body = parse_body(req);
        if (body.contains("csv")) {
          src.kind = DatasetSource::Kind::kUpload;
          src.csv = field<std::string>(body, "csv");
        } else if (body.contains("synth")) {
          const Json syn = field<Json>(body, "synth");
          src.kind = DatasetSource::Kind::kSynth;
          src.seed = field_or<std::uint64_t>(syn, "seed", 42);
          src.rows = field_or<std::size_t>(syn, "rows", 5000);
        } else {
          throw Error(ErrorCode::kValidation, "dataset needs 'csv' or 'synth'");
        }
      }
      return json_response(versioned(s.set_dataset(std::move(src))));
    }
    const Json body = parse_body(req);
    if (step == "target") {
      return json_response(versioned(s.set_target(field<std::string>(body, "feature"), field<std::string>(body, "positive"))));
    }
    if (step == "model") {
      ModelSettings ms;
      ms.family = field_or<std::string>(body, "family", ms.family);
      ms.l2 = field_or<double>(body, "l2", s.describe()["model"]["l2"].get<double>());
      ms.seed = field_or<std::uint64_t>(body, "seed", 0);
      ms.test_fraction = field_or<double>(body, "test_fraction", s.describe()["model"]["test_fraction"].get<double>());
      return json_response(versioned(s.set_model(ms)));
    }
    if (step == "sensitive") {
      return json_response(versioned(s.set_sensitive(
          field<std::vector<std::string>>(body, "features"),
          field_or<std::map<std::string, std::vector<std::string>>>(body, "privileged", {}))));
    }
    if (step == "metrics") {
      std::vector<CustomMetricSource> custom;
      for (const auto& c : field_or<Json>(body, "custom", Json::array())) {
        custom.push_back(CustomMetricSource{field<std::string>(c, "name"), field<std::string>(c, "source_text")});
      }
      return json_response(versioned(s.set_metrics(field_or<std::vector<std::string>>(body, "kinds", {}), custom)));
    }
    if (step == "review") return json_response(versioned(s.confirm()));
    throw not_found(req);
  }

  if (what == "overview" && n == 3 && m == "GET") return json_response(s.overview(p.view()));
  if (what == "graph" && n == 3 && m == "GET") {
    const auto keep = p.get("keep");
    return json_response(s.graph(p.view(), keep ? split_list(*keep) : std::vector<std::string>{}));
  }
  if (what == "features" && n == 4 && m == "GET") return json_response(s.feature_info(seg[3], p.view()));
  if (what == "relationships" && n == 3 && m == "GET") {
    const auto cause = p.get("cause");
    const auto effect = p.get("effect");
    if (!cause || !effect) throw Error(ErrorCode::kValidation, "relationship needs 'cause' and 'effect'");
    return json_response(s.relationship(*cause, *effect, p.view()));
  }
  if (what == "combinations") {
    if (n == 3 && m == "GET") return json_response(s.combinations(p.view()));
    if (n == 3 && m == "POST") {
      const auto [version, id] = s.add_combination(constraint_pairs(parse_body(req)));
      return json_response(versioned(version, Json{{"id", id}}), 201);
    }
    if (n == 4 && m == "DELETE") return json_response(versioned(s.remove_combination(seg[3])));
  }
  if (what == "dataset" && n == 3 && m == "GET") {
    PageQuery q;
    q.view = p.view();
    q.filters = page_filters(p);
    q.sort = p.get("sort").value_or("");
    const auto order = p.get("order").value_or("asc");
    if (order != "asc" && order != "desc") throw Error(ErrorCode::kValidation, "order must be asc or desc");
    q.descending = order == "desc";
    q.page = p.size("page").value_or(1);
    q.page_size = p.size("page_size").value_or(50);
    return json_response(s.dataset_page(q));
  }
  if (what == "applications" && n == 4 && m == "GET") {
    return json_response(s.application(Params::parse_size("application id", seg[3]), p.view()));
  }
  if (what == "scatter" && n == 3 && m == "GET") return json_response(s.scatter(p.size("row"), p.view()));
  if (what == "compare" && n == 3 && m == "GET") {
    const auto a = p.size("a");
    const auto b = p.size("b");
    if (!a || !b) throw Error(ErrorCode::kValidation, "compare needs 'a' and 'b'");
    return json_response(s.compare(*a, *b));
  }
  if (what == "sensitive" && n == 4 && m == "PUT") {
    return json_response(versioned(s.set_sensitive_flag(seg[3], field<bool>(parse_body(req), "value"))));
  }
  if (what == "flags" && n == 5 && m == "PUT") {
    const bool value = field<bool>(parse_body(req), "value");
    if (seg[3] == "features") return json_response(versioned(s.set_unfair_feature(seg[4], value)));
    if (seg[3] == "subgroups") return json_response(versioned(s.set_unfair_subgroup(seg[4], value)));
  }
  if (what == "custom-metrics" && n == 3 && m == "POST") {
    const Json body = parse_body(req);
    return json_response(
        versioned(s.add_custom_metric(field<std::string>(body, "name"), field<std::string>(body, "source_text"))), 201);
  }
  if (what == "selection" && n == 3 && m == "PUT") {
    return json_response(versioned(s.select_application(field<std::size_t>(parse_body(req), "row"))));
  }
  if (what == "train" && n == 3 && m == "POST") {
    const Json body = parse_body(req);
    std::optional<std::uint64_t> seed;
    if (body.contains("seed")) seed = field<std::uint64_t>(body, "seed");
    return json_response(versioned(s.train_model(seed)));
  }
  if (what == "model" && n == 3 && m == "GET") return json_response(s.model_json());
  if (what == "jobs") {
    if (n == 3 && m == "POST") {
      const Json body = parse_body(req);
      const auto kind = field<std::string>(body, "kind");
      std::optional<std::uint64_t> seed;
      if (body.contains("seed")) seed = field<std::uint64_t>(body, "seed");
      JobKind k;
      if (kind == "graph") k = JobKind::kGraph;
      else if (kind == "train") k = JobKind::kTrain;
      else throw Error(ErrorCode::kValidation, "unknown job kind '" + kind + "'", "available: graph, train");
      const std::string id = s.start_job(k, seed);
      return json_response(s.job_status(id), 202);
    }
    if (n == 4 && m == "GET") return json_response(s.job_status(seg[3]));
  }
  if (what == "report" && n == 3 && m == "GET") {
    const Json report = s.export_report();
    if (p.get("format").value_or("json") == "text") return ApiResponse{200, render_report_text(report), "text/plain"};
    return json_response(report);
  }
  throw not_found(req);
}

}  // namespace

Api::Api(Config config) : sessions_(std::move(config)) {}

ApiResponse Api::handle(const ApiRequest& req) {
  try {
    const auto seg = split_path(req.path);
    if (seg.size() < 2 || "/" + seg[0] + "/" + seg[1] != kApiPrefix) throw not_found(req);
    const std::vector<std::string> rest(seg.begin() + 2, seg.end());
    const Params p(req.query);
    if (rest.size() == 1 && rest[0] == "health" && req.method == "GET") return json_response(Json{{"status", "ok"}});
    if (rest.empty() || rest[0] != "sessions") throw not_found(req);
    if (rest.size() == 1) {
      if (req.method == "POST") {
        const Json body = parse_body(req);
        const auto s = sessions_.create(parse_role(field_or<std::string>(body, "role", "data_scientist")));
        return json_response(s->describe(), 201);
      }
      if (req.method == "GET") return json_response(Json{{"sessions", sessions_.ids()}});
      throw not_found(req);
    }
    if (rest.size() == 2 && req.method == "DELETE") {
      sessions_.remove(rest[1]);
      return json_response(Json{{"deleted", rest[1]}});
    }
    const auto session = sessions_.get(rest[1]);
    return session_route(*session, req, rest, p);
  } catch (const Error& e) {
    return json_response(error_body(e), http_status(e.code()));
  } catch (const std::exception& e) {
    return json_response(error_body(Error(ErrorCode::kInternal, e.what())), 500);
  }
}

}  // namespace fairhil
