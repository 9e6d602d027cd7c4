#include "sapgan/service/http_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "sapgan/errors.hpp"

namespace sapgan::service {

namespace {

void reply(httplib::Response& res, const HttpResult& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    reply(res, f());
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    reply(res, {500, "application/json", R"({"error":"internal error"})"});
  }
}

}  // namespace

SurveyHttpServer::SurveyHttpServer(SurveyService& service, ServerOptions opts)
    : service_(service), opts_(std::move(opts)), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  srv.Get("/api/test", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      return service_.get_test(req.get_param_value("participant"), req.get_param_value("lang"));
    });
  });
  srv.Get(R"(/api/images/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service_.get_image(req.matches[1]); });
  });
  srv.Post("/api/response", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service_.post_response(req.body); });
  });
  srv.Get("/api/export.csv", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return service_.export_csv(); });
  });
  if (opts_.static_dir) {
    if (!std::filesystem::is_directory(*opts_.static_dir))
      throw IoError("static asset directory does not exist: " + opts_.static_dir->string());
    srv.set_mount_point("/", opts_.static_dir->string());
  }
}

SurveyHttpServer::~SurveyHttpServer() { stop(); }

int SurveyHttpServer::bind() {
  int port = opts_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(opts_.host);
    if (port < 0) throw IoError("cannot bind " + opts_.host + " to any port");
  } else if (!server_->bind_to_port(opts_.host, port)) {
    throw IoError("cannot bind " + opts_.host + ":" + std::to_string(port));
  }
  spdlog::info("survey server listening on http://{}:{}", opts_.host, port);
  return port;
}

void SurveyHttpServer::serve() { server_->listen_after_bind(); }

void SurveyHttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace sapgan::service
