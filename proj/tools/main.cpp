// dfdialog: command-line front end over the dataflow C API.

#include "dataflow/dataflow.h"
#include "server.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using json = nlohmann::json;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

struct Owned {
  char* p = nullptr;
  ~Owned() { df_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int report(df_status s) {
  std::cerr << "error: " << df_status_name(s) << ": " << df_last_error() << "\n";
  return s == DF_ERR_INTERNAL ? kInternalError : kUserError;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SessionFlags {
  std::string now;
  std::string events;
  std::string syntax = "call";
};

void add_session_flags(CLI::App* cmd, SessionFlags& f) {
  cmd->add_option("--now", f.now, "reference time, e.g. 2023-01-01T08:00 (the default)");
  cmd->add_option("--events", f.events, "JSON fixture for the event store");
}

void add_syntax_flag(CLI::App* cmd, SessionFlags& f) {
  cmd->add_option("--syntax", f.syntax, "annotation syntax")
      ->check(CLI::IsMember({"call", "prefix"}))
      ->capture_default_str();
}

// Returns an exit code on failure.
std::optional<int> open_session(const SessionFlags& f, df_session** out) {
  std::optional<std::string> events;
  if (!f.events.empty()) {
    events = read_file(f.events);
    if (!events) {
      std::cerr << "error: cannot read " << f.events << "\n";
      return kUserError;
    }
  }
  const df_status s = df_session_create(f.now.empty() ? nullptr : f.now.c_str(),
                                        events ? events->c_str() : nullptr, out);
  if (s != DF_OK) return report(s);
  return std::nullopt;
}

// One line of transcript per turn. False when the turn failed.
bool print_turn(const json& turn) {
  const std::string kind = turn.at("outcome").get<std::string>();
  const std::string message = turn.at("message").get<std::string>();
  if (kind == "failed") {
    std::cout << "error: " << turn.value("error", std::string()) << ": " << message << "\n";
    return false;
  }
  std::cout << message << "\n";
  return true;
}

bool is_blank_or_comment(const std::string& line) {
  const auto p = line.find_first_not_of(" \t\r");
  return p == std::string::npos || line[p] == '#';
}

int run_script(const std::string& script, const SessionFlags& f, const std::string& dot_dir) {
  std::ifstream in(script);
  if (!in) {
    std::cerr << "error: cannot read " << script << "\n";
    return kUserError;
  }
  df_session* session = nullptr;
  if (auto code = open_session(f, &session)) return *code;
  bool ok = true;
  std::string line;
  int rc = kOk;
  while (std::getline(in, line)) {
    if (is_blank_or_comment(line)) continue;
    Owned out;
    const df_status s = df_session_run_turn(session, line.c_str(), f.syntax.c_str(), &out.p);
    if (s != DF_OK) {
      rc = report(s);
      break;
    }
    ok = print_turn(json::parse(out.str())) && ok;
  }
  if (rc == kOk && !dot_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dot_dir, ec);
    int turns = 0;
    df_session_turn_count(session, &turns);
    for (int t = 0; t < turns && rc == kOk; ++t) {
      Owned dot;
      const df_status s = df_session_graph_dot(session, t, &dot.p);
      if (s != DF_OK) {
        rc = report(s);
        break;
      }
      const auto path = std::filesystem::path(dot_dir) / ("turn_" + std::to_string(t) + ".dot");
      std::ofstream file(path);
      file << dot.str();
      if (!file) {
        std::cerr << "error: cannot write " << path.string() << "\n";
        rc = kUserError;
      }
    }
  }
  df_session_destroy(session);
  if (rc != kOk) return rc;
  return ok ? kOk : kUserError;
}

int repl(const SessionFlags& f) {
  df_session* session = nullptr;
  if (auto code = open_session(f, &session)) return *code;
  const bool interactive = isatty(STDIN_FILENO) != 0;
  std::string line;
  int last_turn = -1;
  while (true) {
    if (interactive) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == ":quit") break;
    if (line == ":graph") {
      Owned dot;
      const df_status s = df_session_graph_dot(session, last_turn, &dot.p);
      if (s != DF_OK)
        report(s);
      else
        std::cout << dot.str();
      continue;
    }
    if (is_blank_or_comment(line)) continue;
    Owned out;
    const df_status s = df_session_run_turn(session, line.c_str(), f.syntax.c_str(), &out.p);
    if (s != DF_OK) {
      report(s);
      continue;
    }
    const json turn = json::parse(out.str());
    last_turn = turn.value("turn", -1);
    print_turn(turn);
  }
  df_session_destroy(session);
  return kOk;
}

dfserve::Server* active_server = nullptr;

void on_signal(int) {
  if (active_server) active_server->stop();
}

int serve(const SessionFlags& f, const std::string& host, int port, bool wait) {
  dfserve::ServerOptions opts;
  if (!f.now.empty()) opts.now = f.now;
  if (!f.events.empty()) {
    opts.events_json = read_file(f.events);
    if (!opts.events_json) {
      std::cerr << "error: cannot read " << f.events << "\n";
      return kUserError;
    }
  }
  opts.wait_when_busy = wait;
  // Validate flags once before accepting connections.
  df_session* probe = nullptr;
  if (auto code = open_session(f, &probe)) return *code;
  df_session_destroy(probe);

  dfserve::Server server(opts);
  active_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << port << "\n";
  const bool ok = server.listen(host, port);
  active_server = nullptr;
  if (!ok) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return kUserError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataflow dialogue engine"};
  app.require_subcommand(1);

  SessionFlags flags;
  std::string script, dot_dir, in_path, out_path, format = "table", text, phase = "simplify";
  std::string host = "127.0.0.1";
  int port = 8080;
  bool lenient = false, wait = false;

  auto* run = app.add_subcommand("run", "execute a script, one turn per line");
  run->add_option("script", script, "script file")->required();
  add_session_flags(run, flags);
  add_syntax_flag(run, flags);
  run->add_option("--export-dot", dot_dir, "write one DOT file per turn into this directory");

  auto* rep = app.add_subcommand("repl", "interactive dialogue");
  add_session_flags(rep, flags);
  add_syntax_flag(rep, flags);

  auto* simp = app.add_subcommand("simplify", "simplify every annotation of a corpus");
  simp->add_option("input", in_path, "input .jsonl")->required();
  simp->add_option("output", out_path, "output .jsonl")->required();
  simp->add_flag("--lenient", lenient, "skip records that fail to load or rewrite");

  auto* stats = app.add_subcommand("stats", "annotation length quantiles before and after simplification");
  stats->add_option("input", in_path, "input .jsonl")->required();
  stats->add_flag("--lenient", lenient, "skip records that fail to load or rewrite");
  stats->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();

  auto* equiv = app.add_subcommand("equivalence", "execute original and simplified annotations side by side");
  equiv->add_option("input", in_path, "input .jsonl")->required();
  add_session_flags(equiv, flags);

  auto* explain = app.add_subcommand("explain", "show the rewrite trace of one annotation");
  explain->add_option("expression", text, "annotation")->required();
  add_syntax_flag(explain, flags);

  auto* rules = app.add_subcommand("rules", "list rewrite rules in application order");
  rules->add_option("--phase", phase, "rule set")
      ->check(CLI::IsMember({"simplify", "expand"}))
      ->capture_default_str();

  auto* srv = app.add_subcommand("serve", "HTTP JSON API for the console");
  add_session_flags(srv, flags);
  srv->add_option("--host", host, "bind address")->capture_default_str();
  srv->add_option("--port", port, "port")->capture_default_str();
  srv->add_flag("--wait", wait, "queue concurrent turns for one session instead of answering 409");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUserError;
  }

  try {
    if (*run) return run_script(script, flags, dot_dir);
    if (*rep) return repl(flags);
    if (*simp) {
      Owned rep_json;
      const df_status s = df_corpus_simplify(in_path.c_str(), out_path.c_str(), lenient, &rep_json.p);
      if (s != DF_OK) return report(s);
      const json r = json::parse(rep_json.str());
      for (const auto& e : r["errors"]) std::cerr << "skipped: " << e.dump() << "\n";
      std::cout << r["records"].get<std::size_t>() << " records written to " << out_path << "\n";
      return kOk;
    }
    if (*stats) {
      Owned out;
      const df_status s = df_corpus_stats(in_path.c_str(), lenient, format.c_str(), &out.p);
      if (s != DF_OK) return report(s);
      std::cout << out.str();
      if (format == "json") std::cout << "\n";
      return kOk;
    }
    if (*equiv) {
      Owned out;
      const df_status s = df_corpus_equivalence(in_path.c_str(),
                                                flags.events.empty() ? nullptr : flags.events.c_str(),
                                                flags.now.empty() ? nullptr : flags.now.c_str(), &out.p);
      if (s != DF_OK) return report(s);
      const json r = json::parse(out.str());
      for (const auto& row : r["rows"]) {
        if (row["pass"].get<bool>()) continue;
        std::cout << "FAIL " << row["dialogue_id"].get<std::string>() << "  "
                  << row["detail"].get<std::string>() << "\n";
      }
      std::cout << r["passed"].get<std::size_t>() << "/" << r["total"].get<std::size_t>()
                << " dialogues equivalent\n";
      return r["passed"] == r["total"] ? kOk : kUserError;
    }
    if (*explain) {
      Owned out;
      const df_status s = df_explain(text.c_str(), flags.syntax.c_str(), &out.p);
      if (s != DF_OK) return report(s);
      const json r = json::parse(out.str());
      for (const auto& step : r["trace"])
        std::cout << "pass " << step["pass"].get<int>() << "  " << step["rule"].get<std::string>() << "\n  "
                  << step["before"].get<std::string>() << "\n  => " << step["after"].get<std::string>()
                  << "\n";
      std::cout << r["result"].get<std::string>() << "\n";
      return kOk;
    }
    if (*rules) {
      Owned out;
      const df_status s = df_rule_manifest(phase.c_str(), &out.p);
      if (s != DF_OK) return report(s);
      std::cout << out.str();
      return kOk;
    }
    if (*srv) return serve(flags, host, port, wait);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUserError;
}
