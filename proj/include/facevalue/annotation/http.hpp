#pragma once

// HTTP+JSON front end of the annotation store, plus static media and UI files.

#include <filesystem>
#include <memory>
#include <string>

#include "facevalue/annotation/store.hpp"
#include "facevalue/error.hpp"

namespace facevalue::annotation {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;                 // 0 picks a free port
  std::filesystem::path ui_dir;    // served at / when it exists
};

int http_status(Errc code);

class ApiServer {
 public:
  ApiServer(AnnotationStore& store, HttpOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Returns the bound port. Throws IoError when the port is unavailable.
  int bind();
  /// Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace facevalue::annotation
