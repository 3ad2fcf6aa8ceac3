#include "pdgstudio/service.hpp"

#include <httplib.h>

namespace pdg {

struct HttpServer::Impl {
  explicit Impl(StudioService& s) : service(s) {}
  StudioService& service;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(StudioService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  StudioService& svc = impl_->service;
  server.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.health()); });
  server.Post("/session", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.create_session(req.body));
  });
  server.Get(R"(/session/([^/]+)/scene)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.get_scene(req.matches[1]));
  });
  server.Put(R"(/session/([^/]+)/pdg)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.put_pdg(req.matches[1], req.body));
  });
  server.Put(R"(/session/([^/]+)/pose)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.put_pose(req.matches[1], req.body));
  });
  server.Get(R"(/session/([^/]+)/preview/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.get_preview(req.matches[1], req.matches[2]));
  });
  server.Post(R"(/session/([^/]+)/compile)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.compile(req.matches[1], req.body));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    reply(res, {500, {{"error", message}}});
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) reply(res, {res.status, {{"error", "no such endpoint"}}});
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace pdg
