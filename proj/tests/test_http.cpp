#include "server.hpp"
#include "snapshot_check.hpp"

#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>
#include <vector>

using nlohmann::json;

namespace {

struct Running {
  dfserve::Server server;
  int port = -1;
  std::thread thread;

  explicit Running(dfserve::ServerOptions opts = {}) : server(std::move(opts)) {
    port = server.bind_any("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.serve_bound(); });
    server.wait_until_ready();
  }
  ~Running() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

std::string create_session(httplib::Client& cli, const std::string& body = "") {
  auto res = cli.Post("/v1/sessions", body, "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  return json::parse(res->body)["session_id"].get<std::string>();
}

json post_turn(httplib::Client& cli, const std::string& id, const std::string& text) {
  auto res = cli.Post("/v1/sessions/" + id + "/turns", json{{"text", text}}.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  return json::parse(res->body);
}

}  // namespace

TEST_CASE("add-then-revise dialogue over HTTP shares nodes") {
  Running srv;
  auto cli = srv.client();
  const std::string id = create_session(cli);
  const json first = post_turn(cli, id, "Add(2,Add(3,5))");
  CHECK(first["message"] == "10");
  CHECK(first["outcome"] == "success");
  const json second = post_turn(cli, id, "revise(old=Int?(3), new=Int(6))");
  CHECK(second["message"] == "13");
  const auto report = testing::check_revise_sharing(second["graph"]);
  CAPTURE(report.detail);
  CHECK(report.ok);

  auto graph = cli.Get("/v1/sessions/" + id + "/graph");
  REQUIRE(graph);
  CHECK(graph->status == 200);
  CHECK(json::parse(graph->body) == second["graph"]);
  auto dot = cli.Get("/v1/sessions/" + id + "/graph.dot?turn=1");
  REQUIRE(dot);
  CHECK(dot->status == 200);
  CHECK(dot->body.find("digraph dataflow") == 0);
}

TEST_CASE("HTTP errors") {
  Running srv;
  auto cli = srv.client();
  auto res = cli.Get("/v1/sessions/nope/graph");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body)["error"]["code"] == "NotFound");
  res = cli.Post("/v1/sessions/nope/turns", R"j({"text":"1"})j", "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = cli.Delete("/v1/sessions/nope");
  REQUIRE(res);
  CHECK(res->status == 404);

  const std::string id = create_session(cli);
  for (const char* body : {"not json", "[]", R"j({"txt":"1"})j", R"j({"text":1})j"}) {
    CAPTURE(body);
    res = cli.Post("/v1/sessions/" + id + "/turns", body, "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
  }
  res = cli.Post("/v1/sessions", R"j({"now":"soon"})j", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  res = cli.Get("/v1/sessions/" + id + "/graph.dot?turn=4");
  REQUIRE(res);
  CHECK(res->status == 404);

  res = cli.Delete("/v1/sessions/" + id);
  REQUIRE(res);
  CHECK(res->status == 204);
  res = cli.Get("/v1/sessions/" + id + "/graph");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("failed turns are reported in the body") {
  Running srv;
  auto cli = srv.client();
  const std::string id = create_session(cli);
  const json t = post_turn(cli, id, "Nope(1)");
  CHECK(t["outcome"] == "failed");
  CHECK(t["error"] == "UnknownFunction");
}

TEST_CASE("pending prompts and answers over HTTP") {
  Running srv;
  auto cli = srv.client();
  const std::string id = create_session(
      cli, R"j({"events":[{"id":1,"subject":"Planning","start":"2023-01-02T10:00","end":"2023-01-02T11:00"}]})j");
  const json p = post_turn(cli, id, "DeleteEvent(starts_at(tomorrow(), NumberAM(10)))");
  CHECK(p["outcome"] == "pending");
  CHECK(p["pending"]["kind"] == "Confirmation");
  const json c = post_turn(cli, id, "Confirm()");
  CHECK(c["outcome"] == "success");
  CHECK(c["pending"].is_null());
}

TEST_CASE("sessions do not share state") {
  Running srv;
  std::vector<std::thread> workers;
  std::vector<std::string> results(8);
  for (int i = 0; i < 8; ++i) {
    workers.emplace_back([&srv, &results, i] {
      auto cli = srv.client();
      auto res = cli.Post("/v1/sessions", "", "application/json");
      if (!res || res->status != 201) return;
      const std::string id = json::parse(res->body)["session_id"].get<std::string>();
      for (int k = 0; k < 5; ++k)
        cli.Post("/v1/sessions/" + id + "/turns", json{{"text", "Add(" + std::to_string(i) + "," + std::to_string(k) + ")"}}.dump(),
                 "application/json");
      auto graph = cli.Get("/v1/sessions/" + id + "/graph");
      if (!graph) return;
      const json snap = json::parse(graph->body);
      results[i] = std::to_string(snap["turns"].size()) + ":" + snap["turns"][4]["outcome"]["message"].get<std::string>();
    });
  }
  for (auto& w : workers) w.join();
  for (int i = 0; i < 8; ++i) CHECK(results[i] == "5:" + std::to_string(i + 4));
}

TEST_CASE("concurrent turns on one session are serialized") {
  for (bool wait : {false, true}) {
    CAPTURE(wait);
    Running srv(dfserve::ServerOptions{std::nullopt, std::nullopt, wait});
    auto cli0 = srv.client();
    const std::string id = create_session(cli0);
    std::vector<std::thread> workers;
    std::vector<int> status(6, 0);
    for (int i = 0; i < 6; ++i) {
      workers.emplace_back([&, i] {
        auto cli = srv.client();
        auto res = cli.Post("/v1/sessions/" + id + "/turns", R"j({"text":"Add(1,1)"})j", "application/json");
        status[i] = res ? res->status : -1;
      });
    }
    for (auto& w : workers) w.join();
    int ok = 0;
    for (int s : status) {
      CHECK((s == 200 || (!wait && s == 409)));
      ok += s == 200;
    }
    auto graph = cli0.Get("/v1/sessions/" + id + "/graph");
    REQUIRE(graph);
    CHECK(json::parse(graph->body)["turns"].size() == static_cast<std::size_t>(ok));
    if (wait) CHECK(ok == 6);
  }
}
