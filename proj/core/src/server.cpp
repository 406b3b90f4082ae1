// Engine headers (Eigen) go before httplib: resolv.h defines a `_res` macro.
#include "fairhil/api.hpp"

#include <httplib.h>

namespace fairhil {

void run_server(Api& api, const std::string& host, int port) {
  httplib::Server server;
  const auto dispatch = [&api](const httplib::Request& req, httplib::Response& res) {
    ApiRequest in;
    in.method = req.method;
    in.path = req.path;
    for (const auto& [k, v] : req.params) in.query.emplace(k, v);
    in.body = req.body;
    in.content_type = req.get_header_value("Content-Type");
    const ApiResponse out = api.handle(in);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const std::string pattern = std::string(kApiPrefix) + "/.*";
  server.Get(pattern, dispatch);
  server.Post(pattern, dispatch);
  server.Put(pattern, dispatch);
  server.Delete(pattern, dispatch);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kInternal, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace fairhil
