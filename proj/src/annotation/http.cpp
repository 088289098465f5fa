#include "facevalue/annotation/http.hpp"

#include <httplib.h>

namespace facevalue::annotation {

using nlohmann::json;

int http_status(Errc code) {
  switch (code) {
    case Errc::kUnknownDataset:
    case Errc::kUnknownSession:
    case Errc::kUnknownItem:
    case Errc::kNoData:
      return 404;
    case Errc::kAlreadyAnswered:
      return 409;
    case Errc::kInvalidChoice:
    case Errc::kBadRequest:
    case Errc::kConfigError:
      return 400;
    default:
      return 500;
  }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& message) {
  send_json(res, {{"error", std::string(to_string(code))}, {"message", message}}, http_status(code));
}

json parse_body(const httplib::Request& req) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::kBadRequest, "body must be a JSON object");
  return j;
}

std::string field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(Errc::kBadRequest, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::string dataset_param(const httplib::Request& req) {
  if (!req.has_param("dataset")) throw Error(Errc::kBadRequest, "missing query parameter 'dataset'");
  return req.get_param_value("dataset");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.detail());
    }
  };
}

}  // namespace

struct ApiServer::Impl {
  AnnotationStore& store;
  HttpOptions options;
  httplib::Server server;
  int port = -1;

  Impl(AnnotationStore& s, HttpOptions o) : store(s), options(std::move(o)) { routes(); }

  void routes() {
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, {{"status", "ok"}});
    });

    server.Get("/api/datasets", guarded([this](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& name : store.dataset_names()) {
        const Dataset& d = store.dataset(name);
        arr.push_back({{"name", d.name}, {"choices", d.choices}, {"items", d.items.size()}});
      }
      send_json(res, {{"datasets", arr}});
    }));

    server.Post("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      send_json(res, store.create_session(field(body, "annotator_id"), field(body, "dataset")).to_json());
    }));

    server.Get(R"(/api/session/([^/]+)/next)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const NextItem next = store.next_item(req.matches[1].str());
      if (next.done()) {
        send_json(res, {{"done", true}});
        return;
      }
      json body = public_view(*next.item);
      body["done"] = false;
      send_json(res, body);
    }));

    server.Post(R"(/api/session/([^/]+)/answer)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  send_json(res, store.submit_answer(req.matches[1].str(), field(body, "item_id"),
                                                     field(body, "guess"))
                                     .to_json());
                }));

    server.Get("/api/leaderboard", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string name = dataset_param(req);
      json body = store.leaderboard(name).to_json();
      body["dataset"] = name;
      send_json(res, body);
    }));

    server.Get("/api/stats", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string name = dataset_param(req);
      json body = store.human_stats(name).to_json();
      body["dataset"] = name;
      send_json(res, body);
    }));

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      send_json(res, {{"error", "Internal"}, {"message", message}}, 500);
    });

    const auto media = store.config().data_dir / "media";
    std::error_code ec;
    if (std::filesystem::is_directory(media, ec)) server.set_mount_point("/media", media.string());
    if (!options.ui_dir.empty() && std::filesystem::is_directory(options.ui_dir, ec)) {
      server.set_mount_point("/", options.ui_dir.string());
    }
  }
};

ApiServer::ApiServer(AnnotationStore& store, HttpOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

ApiServer::~ApiServer() = default;

int ApiServer::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
  } else if (impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  }
  if (impl_->port <= 0) {
    throw Error(Errc::kIoError, "cannot listen on " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void ApiServer::serve() {
  if (impl_->port <= 0) bind();
  impl_->server.listen_after_bind();
}

void ApiServer::stop() { impl_->server.stop(); }

}  // namespace facevalue::annotation
