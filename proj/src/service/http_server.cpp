#include "hhrl/service/http_server.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "hhrl/core/errors.hpp"
#include "hhrl/version.hpp"

namespace hhrl {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::string& path = {}) {
  json err = {{"code", code}, {"message", message}};
  if (!path.empty()) err["path"] = path;
  send_json(res, status, {{"schema", kSessionSchema}, {"error", std::move(err)}});
}

// Maps service exceptions onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& handler) {
  try {
    handler();
  } catch (const ConfigError& e) {
    send_error(res, 400, "invalid_config", e.what(), e.path());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const NotFoundError& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, "conflict", e.what());
  } catch (const ProtocolError& e) {
    send_error(res, 409, "protocol_error", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

json acts_json(const std::vector<SarAct>& acts) {
  json out = json::array();
  for (const auto& a : acts) out.push_back(to_json(a));
  return out;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

struct HttpServer::Impl {
  SessionService& service;
  HttpOptions options;
  httplib::Server server;
  std::thread sweeper;
  std::mutex sweep_mutex;
  std::condition_variable sweep_cv;
  bool stopping = false;
  std::atomic<bool> bound{false};
  std::atomic<bool> run_entered{false};
  std::atomic<bool> listen_done{false};
  std::atomic<bool> stop_requested{false};

  Impl(SessionService& s, HttpOptions o) : service(s), options(std::move(o)) {
    // httplib's default also sets SO_REUSEPORT, which lets a second server share the port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    routes();
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}, {"schema", kSessionSchema}, {"version", kVersion}});
    });

    server.Post("/v1/interventions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto id = service.create_intervention(parse_body(req));
        send_json(res, 201, {{"schema", kSessionSchema}, {"intervention_id", id}});
      });
    });

    server.Get(R"(/v1/interventions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto info = service.intervention(req.matches[1]);
        send_json(res, 200,
                  {{"schema", kSessionSchema},
                   {"intervention_id", info.id},
                   {"sessions_completed", info.sessions_completed},
                   {"active_session", info.active_session ? json(*info.active_session) : json(nullptr)},
                   {"config", to_json(info.config)},
                   {"loc_table", to_json(TableSnapshot{"loc", info.tables.challenge, info.config.controller.loc_params, {}})},
                   {"lof_table", to_json(TableSnapshot{"lof", info.tables.feedback, info.config.controller.lof_params, {}})}});
      });
    });

    server.Post(R"(/v1/interventions/([^/]+)/sessions)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto started = service.start_session(req.matches[1]);
        send_json(res, 201,
                  {{"schema", kSessionSchema},
                   {"session_id", started.session_id},
                   {"acts", acts_json(started.acts)},
                   {"session", to_json(service.get_state(started.session_id))}});
      });
    });

    server.Get(R"(/v1/interventions/([^/]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, to_json(service.get_report(req.matches[1]))); });
    });

    server.Post(R"(/v1/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        LearnerEventKind kind;
        try {
          kind = learner_event_kind_from_string(body.at("kind").get<std::string>());
        } catch (const ProtocolError& e) {
          send_error(res, 400, "bad_request", e.what());
          return;
        }
        const auto acts = service.submit_event(req.matches[1], kind, body.value("payload", std::string{}));
        send_json(res, 200,
                  {{"schema", kSessionSchema}, {"acts", acts_json(acts)}, {"session", to_json(service.get_state(req.matches[1]))}});
      });
    });

    server.Get(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, to_json(service.get_state(req.matches[1]))); });
    });

    server.Post(R"(/v1/sessions/([^/]+)/end)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, to_json(service.end_session(req.matches[1]))); });
    });

    server.Get(R"(/v1/sessions/([^/]+)/stream)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string sid = req.matches[1];
        service.get_state(sid);  // 404 before committing to a stream
        std::size_t after = 0;
        if (req.has_param("after")) after = std::stoul(req.get_param_value("after"));
        if (req.has_header("Last-Event-ID")) after = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
        auto cursor = std::make_shared<std::size_t>(after);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [this, sid, cursor](std::size_t, httplib::DataSink& sink) {
          const auto messages = service.wait_messages(sid, *cursor, std::chrono::seconds(1));
          bool ended = false;
          for (const auto& m : messages) {
            const std::string frame = "id: " + std::to_string(*cursor) + "\nevent: " + m.type +
                                      "\ndata: " + to_json(m).dump() + "\n\n";
            if (!sink.write(frame.data(), frame.size())) return false;
            ++*cursor;
            ended = ended || m.type == "session_end";
          }
          if (ended || stopped()) {
            sink.done();
            return true;
          }
          if (messages.empty()) {
            static constexpr std::string_view keepalive = ": keepalive\n\n";
            if (!sink.write(keepalive.data(), keepalive.size())) return false;
          }
          return true;
        });
      });
    });
  }

  bool stopped() {
    std::lock_guard lock(sweep_mutex);
    return stopping;
  }

  void sweep_loop() {
    std::unique_lock lock(sweep_mutex);
    while (!stopping) {
      sweep_cv.wait_for(lock, options.sweep_interval, [&] { return stopping; });
      if (stopping) break;
      lock.unlock();
      service.expire_idle();
      lock.lock();
    }
  }
};

HttpServer::HttpServer(SessionService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() {
  stop();
  if (impl_->sweeper.joinable()) impl_->sweeper.join();
}

int HttpServer::bind() {
  auto& o = impl_->options;
  int port = o.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(o.bind);
    if (port < 0) throw IoError("cannot bind " + o.bind);
  } else if (!impl_->server.bind_to_port(o.bind, port)) {
    throw IoError("cannot bind " + o.bind + ":" + std::to_string(port) + " (address in use or unavailable)");
  }
  o.port = port;
  impl_->bound = true;
  return port;
}

void HttpServer::run() {
  if (!impl_->bound) throw ContractViolation("HttpServer::run before bind");
  impl_->sweeper = std::thread([this] { impl_->sweep_loop(); });
  impl_->run_entered = true;
  if (!impl_->stop_requested) impl_->server.listen_after_bind();
  impl_->listen_done = true;
  stop();
  if (impl_->sweeper.joinable()) impl_->sweeper.join();
}

void HttpServer::stop() {
  {
    std::lock_guard lock(impl_->sweep_mutex);
    impl_->stopping = true;
  }
  impl_->sweep_cv.notify_all();
  impl_->service.shutdown();
  impl_->stop_requested = true;
  // A stop that lands between run() starting and httplib marking itself running would be lost.
  if (impl_->run_entered) {
    while (!impl_->server.is_running() && !impl_->listen_done) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  impl_->server.stop();
}

}  // namespace hhrl
