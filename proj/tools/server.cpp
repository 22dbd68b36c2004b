#include "server.hpp"

#include "dataflow/dataflow.h"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <map>
#include <mutex>

namespace dfserve {

namespace {

using json = nlohmann::json;

struct Session {
  df_session* handle = nullptr;
  std::mutex turn_lock;

  ~Session() { df_session_destroy(handle); }
};

struct Owned {
  char* p = nullptr;
  ~Owned() { df_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"code", code}, {"message", message}}}}.dump(), "application/json");
}

int status_for(df_status s) {
  switch (s) {
    case DF_ERR_INTERNAL: return 500;
    case DF_ERR_IO: return 500;
    default: return 400;
  }
}

void send_status_error(httplib::Response& res, df_status s) {
  send_error(res, status_for(s), df_status_name(s), df_last_error());
}

}  // namespace

struct Server::Impl {
  ServerOptions options;
  httplib::Server http;
  std::mutex sessions_lock;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::atomic<unsigned long> next_id{1};

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard<std::mutex> lock(sessions_lock);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  void routes() {
    http.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> now = options.now;
      std::optional<std::string> events = options.events_json;
      if (!req.body.empty()) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object())
          return send_error(res, 400, "BadRequest", "body must be a JSON object");
        if (body.contains("now")) {
          if (!body["now"].is_string()) return send_error(res, 400, "BadRequest", "now must be a string");
          now = body["now"].get<std::string>();
        }
        if (body.contains("events")) {
          if (!body["events"].is_array())
            return send_error(res, 400, "BadRequest", "events must be an array");
          events = body["events"].dump();
        }
      }
      auto session = std::make_shared<Session>();
      const df_status s = df_session_create(now ? now->c_str() : nullptr,
                                            events ? events->c_str() : nullptr, &session->handle);
      if (s != DF_OK) return send_status_error(res, s);
      const std::string id = "s" + std::to_string(next_id++);
      {
        std::lock_guard<std::mutex> lock(sessions_lock);
        sessions.emplace(id, session);
      }
      res.status = 201;
      res.set_content(json{{"session_id", id}}.dump(), "application/json");
    });

    http.Post(R"(/v1/sessions/([^/]+)/turns)", [this](const httplib::Request& req, httplib::Response& res) {
      auto session = find(req.matches[1]);
      if (!session) return send_error(res, 404, "NotFound", "unknown session");
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string())
        return send_error(res, 400, "BadRequest", "body must be {\"text\": string}");
      std::string syntax = "call";
      if (body.contains("syntax")) {
        if (!body["syntax"].is_string()) return send_error(res, 400, "BadRequest", "syntax must be a string");
        syntax = body["syntax"].get<std::string>();
      }
      std::unique_lock<std::mutex> lock(session->turn_lock, std::defer_lock);
      if (options.wait_when_busy) {
        lock.lock();
      } else if (!lock.try_lock()) {
        return send_error(res, 409, "Busy", "a turn is already being processed for this session");
      }
      const std::string text = body["text"].get<std::string>();
      Owned turn, graph;
      df_status s = df_session_run_turn(session->handle, text.c_str(), syntax.c_str(), &turn.p);
      if (s != DF_OK) return send_status_error(res, s);
      s = df_session_graph_json(session->handle, &graph.p);
      if (s != DF_OK) return send_status_error(res, s);
      json out = json::parse(turn.str());
      out["graph"] = json::parse(graph.str());
      res.set_content(out.dump(), "application/json");
    });

    http.Get(R"(/v1/sessions/([^/]+)/graph)", [this](const httplib::Request& req, httplib::Response& res) {
      auto session = find(req.matches[1]);
      if (!session) return send_error(res, 404, "NotFound", "unknown session");
      std::lock_guard<std::mutex> lock(session->turn_lock);
      Owned graph;
      const df_status s = df_session_graph_json(session->handle, &graph.p);
      if (s != DF_OK) return send_status_error(res, s);
      res.set_content(graph.str(), "application/json");
    });

    http.Get(R"(/v1/sessions/([^/]+)/graph\.dot)", [this](const httplib::Request& req, httplib::Response& res) {
      auto session = find(req.matches[1]);
      if (!session) return send_error(res, 404, "NotFound", "unknown session");
      int turn = -1;
      if (req.has_param("turn")) {
        try {
          turn = std::stoi(req.get_param_value("turn"));
        } catch (const std::exception&) {
          return send_error(res, 400, "BadRequest", "turn must be an integer");
        }
        if (turn < 0) return send_error(res, 400, "BadRequest", "turn must be non-negative");
      }
      std::lock_guard<std::mutex> lock(session->turn_lock);
      Owned dot;
      const df_status s = df_session_graph_dot(session->handle, turn, &dot.p);
      if (s == DF_ERR_UNKNOWN_TURN) return send_error(res, 404, df_status_name(s), df_last_error());
      if (s != DF_OK) return send_status_error(res, s);
      res.set_content(dot.str(), "text/vnd.graphviz");
    });

    http.Delete(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<Session> session;
      {
        std::lock_guard<std::mutex> lock(sessions_lock);
        auto it = sessions.find(req.matches[1]);
        if (it == sessions.end()) return send_error(res, 404, "NotFound", "unknown session");
        session = it->second;
        sessions.erase(it);
      }
      res.status = 204;
    });

    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        if (ep) std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      send_error(res, 500, "Internal", message);
    });
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->routes();
}

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int Server::bind_any(const std::string& host) { return impl_->http.bind_to_any_port(host); }

bool Server::serve_bound() { return impl_->http.listen_after_bind(); }

void Server::wait_until_ready() { impl_->http.wait_until_ready(); }

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace dfserve
