#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "sapgan/service/survey_service.hpp"

namespace httplib {
class Server;
}

namespace sapgan::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
};

/// Binds the survey API (and optional static frontend) to a local socket.
class SurveyHttpServer {
 public:
  SurveyHttpServer(SurveyService& service, ServerOptions opts);
  ~SurveyHttpServer();

  /// Returns the bound port. Throws IoError when the socket cannot be bound.
  int bind();
  /// Blocks until stop() is called from another thread.
  void serve();
  void stop();

 private:
  SurveyService& service_;
  ServerOptions opts_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace sapgan::service
