#pragma once

// HTTP JSON API: claim verification, framework inspection and contestation
// sessions with replayable edit histories.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "argllm/contestation.hpp"
#include "argllm/document.hpp"
#include "argllm/error.hpp"
#include "argllm/pipeline.hpp"

namespace argllm {

struct HistoryEntry {
  ContestationEdit edit;
  ContestationDiff diff;
};

/// Immutable once published; writers build a new one and swap it in.
struct SessionState {
  std::string id;
  SemanticsId semantics = SemanticsId::df_quad;
  Qbaf initial;
  Qbaf current;
  StrengthMap strengths;
  std::vector<HistoryEntry> history;
  Json origin;  // how the session was opened (claim and method, or a parent session)
};

inline Json session_view(const SessionState& s) {
  Json j;
  j["session_id"] = s.id;
  j["semantics"] = to_string(s.semantics);
  const double root = s.strengths.at(s.current.root());
  j["root_strength"] = root;
  j["label"] = decide(root);
  j["qbaf"] = to_document(s.current, {s.strengths});
  j["history"] = Json::array();
  for (const auto& h : s.history) j["history"].push_back(to_json(h.diff));
  j["origin"] = s.origin;
  return j;
}

/// Maps library errors onto response codes: client mistakes 400, edits that
/// cannot apply 422, model trouble 502.
inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::missing_field:
    case ErrorCode::precondition:
    case ErrorCode::unknown_template:
      return 400;
    case ErrorCode::unknown_target:
    case ErrorCode::would_remove_root:
    case ErrorCode::malformed_edit:
    case ErrorCode::value_out_of_range:
    case ErrorCode::non_finite:
    case ErrorCode::invalid_framework:
    case ErrorCode::unknown_argument:
    case ErrorCode::argument_is_root:
      return 422;
    case ErrorCode::backend_failure:
    case ErrorCode::network_error:
    case ErrorCode::auth_error:
    case ErrorCode::rate_limited:
    case ErrorCode::malformed_response:
    case ErrorCode::unparseable_confidence:
    case ErrorCode::unparseable_answer:
      return 502;
    default:
      return 500;
  }
}

/// Reads {"method", "semantics", "depth", "base_mode", "supporters",
/// "attackers"} with defaults for anything absent.
inline MethodConfig method_config_from_json(const Json& j, MethodConfig base = {}) {
  try {
    if (j.contains("method")) {
      auto m = parse_method(j["method"].get<std::string>());
      if (!m) throw Error(ErrorCode::precondition, "unknown method '" + j["method"].get<std::string>() + "'");
      base.method = *m;
    }
    if (j.contains("semantics")) {
      auto s = parse_semantics(j["semantics"].get<std::string>());
      if (!s) throw Error(ErrorCode::precondition, "unknown semantics '" + j["semantics"].get<std::string>() + "'");
      base.semantics = *s;
    }
    if (j.contains("depth")) base.generation.depth = j["depth"].get<int>();
    if (j.contains("supporters")) base.generation.supporters_per_node = j["supporters"].get<int>();
    if (j.contains("attackers")) base.generation.attackers_per_node = j["attackers"].get<int>();
    if (j.contains("base_mode")) {
      auto b = parse_base_mode(j["base_mode"].get<std::string>());
      if (!b) throw Error(ErrorCode::precondition, "unknown base_mode");
      base.generation.claim_base_mode = *b;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
  base.generation.check();
  return base;
}

struct ServiceConfig {
  std::shared_ptr<Backend> backend;
  TemplateSet templates = TemplateSet::builtin();
  MethodConfig defaults;
  std::optional<std::filesystem::path> snapshot_dir;
  bool cors = false;
};

class Service {
 public:
  explicit Service(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.backend) throw Error(ErrorCode::precondition, "service needs a backend");
    if (config_.snapshot_dir) {
      std::filesystem::create_directories(*config_.snapshot_dir);
      restore();
    }
    routes();
  }

  ~Service() { stop(); }
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorCode::precondition, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return bound;
  }

  /// Blocks serving on the calling thread.
  bool listen(const std::string& host, int port) { return server_.listen(host, port); }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  // Session operations, also usable without HTTP.

  std::shared_ptr<const SessionState> open_session(Qbaf q, SemanticsId sem, Json origin) {
    require_valid(q);
    auto st = std::make_shared<SessionState>();
    st->id = new_id();
    st->semantics = sem;
    st->strengths = evaluate(q, sem);
    st->initial = q;
    st->current = std::move(q);
    st->origin = std::move(origin);
    auto slot = std::make_shared<Slot>();
    slot->state = st;
    {
      std::unique_lock lock(sessions_mu_);
      sessions_[st->id] = slot;
    }
    persist(*st);
    return st;
  }

  std::shared_ptr<const SessionState> find(const std::string& id) const {
    auto slot = slot_for(id);
    return slot ? slot->load() : nullptr;
  }

  /// Applies one edit under the session's writer lock.
  std::pair<ContestationDiff, std::shared_ptr<const SessionState>> contest(const std::string& id,
                                                                          const ContestationEdit& edit) {
    auto slot = slot_for(id);
    if (!slot) throw Error(ErrorCode::unknown_target, "no session '" + id + "'");
    std::lock_guard writer(slot->writer);
    auto cur = slot->load();
    EditResult r = apply_edit(cur->current, edit, cur->semantics);
    auto next = std::make_shared<SessionState>(*cur);
    next->current = std::move(r.qbaf);
    next->strengths = std::move(r.strengths);
    next->history.push_back({r.diff.edit, r.diff});
    slot->store(next);
    persist(*next);
    return {r.diff, next};
  }

  /// New session holding the initial framework plus the first `upto` edits
  /// of an existing one.
  std::shared_ptr<const SessionState> fork(const std::string& id, std::optional<std::size_t> upto) {
    auto src = find(id);
    if (!src) throw Error(ErrorCode::unknown_target, "no session '" + id + "'");
    const std::size_t n = upto.value_or(src->history.size());
    if (n > src->history.size())
      throw Error(ErrorCode::precondition, "upto " + std::to_string(n) + " exceeds history of " +
                                               std::to_string(src->history.size()));
    auto st = open_session(src->initial, src->semantics, Json{{"forked_from", id}, {"upto", n}});
    for (std::size_t i = 0; i < n; ++i) st = contest(st->id, src->history[i].edit).second;
    return st;
  }

  std::vector<std::string> session_ids() const {
    std::shared_lock lock(sessions_mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

  httplib::Server& server() { return server_; }

 private:
  struct Slot {
    std::mutex writer;                  // one contest at a time
    mutable std::mutex ptr;             // guards the pointer swap only
    std::shared_ptr<const SessionState> state;
    std::shared_ptr<const SessionState> load() const {
      std::lock_guard l(ptr);
      return state;
    }
    void store(std::shared_ptr<const SessionState> s) {
      std::lock_guard l(ptr);
      state = std::move(s);
    }
  };

  std::shared_ptr<Slot> slot_for(const std::string& id) const {
    std::shared_lock lock(sessions_mu_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::string new_id() {
    std::lock_guard lock(rng_mu_);
    std::uniform_int_distribution<std::uint64_t> d;
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(d(rng_)),
                  static_cast<unsigned long long>(d(rng_)));
    return buf;
  }

  // Snapshots: the initial framework and the edit list; the current state is
  // rebuilt by replay on restore.
  void persist(const SessionState& s) {
    if (!config_.snapshot_dir) return;
    Json j;
    j["session_id"] = s.id;
    j["semantics"] = to_string(s.semantics);
    j["initial"] = to_json(s.initial);
    j["edits"] = Json::array();
    for (const auto& h : s.history) j["edits"].push_back(to_json(h.edit));
    j["origin"] = s.origin;
    auto path = *config_.snapshot_dir / (s.id + ".json");
    auto tmp = path;
    tmp += ".tmp";
    std::lock_guard lock(persist_mu_);
    write_text_file(tmp.string(), j.dump(2, ' ', false, Json::error_handler_t::replace));
    std::filesystem::rename(tmp, path);
  }

  void restore() {
    for (const auto& entry : std::filesystem::directory_iterator(*config_.snapshot_dir)) {
      if (entry.path().extension() != ".json") continue;
      Json j = parse_json_text(read_text_file(entry.path().string()), entry.path().string());
      auto sem = parse_semantics(j.at("semantics").get<std::string>());
      if (!sem) throw Error(ErrorCode::parse_error, entry.path().string() + ": unknown semantics");
      auto st = std::make_shared<SessionState>();
      st->id = j.at("session_id").get<std::string>();
      st->semantics = *sem;
      st->initial = qbaf_from_json(j.at("initial"));
      st->current = st->initial;
      st->origin = j.value("origin", Json::object());
      for (const auto& e : edits_from_json(j.at("edits"))) {
        EditResult r = apply_edit(st->current, e, st->semantics);
        st->current = std::move(r.qbaf);
        st->history.push_back({r.diff.edit, r.diff});
      }
      st->strengths = evaluate(st->current, st->semantics);
      auto slot = std::make_shared<Slot>();
      slot->state = st;
      sessions_[st->id] = slot;
    }
  }

  // -------------------------------------------------------------------------
  // HTTP

  static void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
  }

  static void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send(res, status, Json{{"error", code}, {"message", message}});
  }

  static Json body_of(const httplib::Request& req) {
    try {
      Json j = Json::parse(req.body);
      if (!j.is_object()) throw Error(ErrorCode::parse_error, "request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, std::string("malformed JSON: ") + e.what());
    }
  }

  template <class F>
  auto guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    if (config_.cors) {
      server_.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
      });
      server_.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"ok", true}}); });

    server_.Get("/semantics", [](const httplib::Request&, httplib::Response& res) {
      send(res, 200, {{"semantics", SemanticsRegistry::global().names()}, {"default", "df-quad"}});
    });

    server_.Post("/verify", guarded([this](const httplib::Request& req, httplib::Response& res) {
                   Json body = body_of(req);
                   if (!body.contains("claim") || !body["claim"].is_string() ||
                       body["claim"].get<std::string>().empty())
                     throw Error(ErrorCode::missing_field, "'claim' must be a non-empty string");
                   Claim c;
                   c.id = body.value("id", std::string("request"));
                   c.text = body["claim"].get<std::string>();
                   if (body.contains("context") && body["context"].is_string())
                     c.context = body["context"].get<std::string>();
                   const MethodConfig cfg = method_config_from_json(body, config_.defaults);
                   Verdict v = verify(c, cfg, *config_.backend, config_.templates);
                   Json out = verdict_to_json(v, true);
                   if (v.qbaf) {
                     auto st = open_session(*v.qbaf, cfg.semantics,
                                            Json{{"claim", c.text},
                                                 {"context", c.context ? Json(*c.context) : Json(nullptr)},
                                                 {"method", v.method}});
                     out["session_id"] = st->id;
                   }
                   send(res, 200, out);
                 }));

    server_.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      send(res, 200, {{"sessions", session_ids()}});
    });

    // Opens a session from a framework document.
    server_.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                   Json body = body_of(req);
                   const Json& doc = body.contains("qbaf") ? body["qbaf"] : body;
                   SemanticsId sem = config_.defaults.semantics;
                   if (body.contains("semantics")) {
                     auto s = parse_semantics(body["semantics"].get<std::string>());
                     if (!s) throw Error(ErrorCode::precondition, "unknown semantics");
                     sem = *s;
                   }
                   auto st = open_session(qbaf_from_json(doc), sem, Json{{"source", "document"}});
                   send(res, 201, session_view(*st));
                 }));

    server_.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto st = find(req.matches[1]);
      if (!st) return send_error(res, 404, "unknown-session", "no session '" + std::string(req.matches[1]) + "'");
      send(res, 200, session_view(*st));
    });

    server_.Post(R"(/sessions/([^/]+)/contest)",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   if (!find(id)) return send_error(res, 404, "unknown-session", "no session '" + id + "'");
                   Json body = body_of(req);
                   const ContestationEdit edit = edit_from_json(body.contains("edit") ? body["edit"] : body);
                   auto [diff, st] = contest(id, edit);
                   send(res, 200, {{"diff", to_json(diff)}, {"session", session_view(*st)}});
                 }));

    // Fork: a fresh session replaying the first `upto` edits.
    server_.Post(R"(/sessions/([^/]+)/replay)",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   const std::string id = req.matches[1];
                   if (!find(id)) return send_error(res, 404, "unknown-session", "no session '" + id + "'");
                   Json body = req.body.empty() ? Json::object() : body_of(req);
                   std::optional<std::size_t> upto;
                   if (body.contains("upto") && !body["upto"].is_null()) {
                     if (!body["upto"].is_number_unsigned())
                       throw Error(ErrorCode::parse_error, "'upto' must be a non-negative integer");
                     upto = body["upto"].get<std::size_t>();
                   }
                   try {
                     send(res, 201, session_view(*fork(id, upto)));
                   } catch (const Error& e) {
                     if (e.code() != ErrorCode::precondition) throw;
                     send_error(res, 422, to_string(e.code()), e.what());
                   }
                 }));
  }

  ServiceConfig config_;
  httplib::Server server_;
  std::thread thread_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_{std::random_device{}()};
  std::mutex persist_mu_;
};

}  // namespace argllm
