#pragma once

#include <map>
#include <string>

#include "fairhil/config.hpp"
#include "fairhil/error.hpp"
#include "fairhil/serialize.hpp"
#include "fairhil/session.hpp"

namespace fairhil {

inline constexpr std::string_view kApiPrefix = "/api/v1";

struct ApiRequest {
  std::string method;  // GET, POST, PUT, DELETE
  std::string path;    // without the query string
  std::multimap<std::string, std::string> query;
  std::string body;
  std::string content_type = "application/json";
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// 400 for input errors, 404 unknown entities, 409 state errors, 500 otherwise.
int http_status(ErrorCode code) noexcept;
Json error_body(const Error& error);

// Transport-independent router over a SessionManager; the HTTP server and
// the tests both go through handle().
class Api {
 public:
  explicit Api(Config config);

  ApiResponse handle(const ApiRequest& request);
  SessionManager& sessions() noexcept { return sessions_; }

 private:
  SessionManager sessions_;
};

// Blocks serving `api` over HTTP until the process is stopped.
void run_server(Api& api, const std::string& host, int port);

}  // namespace fairhil
