#include "kg/service.hpp"

#include "kg/completeness.hpp"
#include "kg/explainer.hpp"
#include "kg/loader.hpp"
#include "kg/wire.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace kg {

using nlohmann::json;

namespace {

constexpr int kMaxExplainDepth = 32;

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ServiceResponse error_response(int status, const std::string& message,
                               std::optional<std::uint64_t> revision = std::nullopt) {
  return {status, json{{"error", message}}, revision};
}

json field_diagnostic(const std::string& field, std::string_view code, const std::string& message) {
  return json{{"field", field}, {"code", std::string(code)}, {"message", message}};
}

} // namespace

GraphRegistry load_graph_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error(dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), ".kg.xml")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  GraphRegistry out;
  std::string problems;
  for (const auto& path : files) {
    auto result = load_file(path);
    if (!result.ok()) {
      for (const auto& d : result.diagnostics) {
        if (d.is_error()) {
          problems += format_diagnostic(d) + "\n";
        }
      }
      continue;
    }
    auto id = result.graph->id();
    if (id.empty()) {
      auto name = path.filename().string();
      id = name.substr(0, name.size() - std::string_view(".kg.xml").size());
    }
    if (!out.emplace(id, result.graph).second) {
      problems += path.string() + ": duplicate graph id '" + id + "'\n";
    }
  }
  if (!problems.empty()) {
    throw std::runtime_error(problems);
  }
  return out;
}

struct SessionService::Session {
  Session(std::string id_, std::string graph_id_, std::shared_ptr<const KnowledgeGraph> graph_)
      : id(std::move(id_)), graph_id(std::move(graph_id_)), graph(std::move(graph_)), state(*graph) {
    last.emplace(recompute(*graph, store, state));
    created = updated = std::chrono::system_clock::now();
  }

  std::mutex mutex;
  std::string id;
  std::string graph_id;
  std::shared_ptr<const KnowledgeGraph> graph;
  FactStore store;
  EvalState state;
  std::optional<EvalResult> last;
  std::chrono::system_clock::time_point created;
  std::chrono::system_clock::time_point updated;
};

SessionService::SessionService(GraphRegistry graphs, std::optional<std::filesystem::path> snapshot_dir)
    : graphs_(std::move(graphs)), snapshot_dir_(std::move(snapshot_dir)) {
  if (snapshot_dir_) {
    std::filesystem::create_directories(*snapshot_dir_);
    replay();
  }
}

SessionService::~SessionService() = default;

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionService::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

void SessionService::append_log(const std::string& session_id, const json& record) const {
  if (!snapshot_dir_) {
    return;
  }
  std::ofstream out(*snapshot_dir_ / (session_id + ".jsonl"), std::ios::app);
  out << record.dump() << '\n';
  out.flush();
  if (!out) {
    throw std::runtime_error("cannot append to snapshot of " + session_id);
  }
}

void SessionService::replay() {
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(*snapshot_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      logs.push_back(entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    const auto id = path.stem().string();
    std::ifstream in(path);
    std::string line;
    std::shared_ptr<Session> session;
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      const auto record = json::parse(line, nullptr, false);
      if (record.is_discarded()) {
        std::cerr << "kgserve: " << path.string() << ": ignoring unreadable record\n";
        continue;
      }
      if (!session) {
        const auto graph_id = record.value("graph", std::string());
        auto g = graphs_.find(graph_id);
        if (g == graphs_.end()) {
          std::cerr << "kgserve: " << path.string() << ": graph '" << graph_id << "' is not loaded; skipped\n";
          break;
        }
        session = std::make_shared<Session>(id, graph_id, g->second);
        continue;
      }
      apply(*session, record, false);
    }
    if (session) {
      sessions_.emplace(id, session);
      if (id.size() > 1 && id[0] == 's') {
        try {
          next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(1)) + 1);
        } catch (const std::exception&) {
          // Foreign file name; keep the counter.
        }
      }
    }
  }
}

ServiceResponse SessionService::create_session(const json& body) {
  if (!body.is_object() || !body.contains("graph") || !body.at("graph").is_string()) {
    return error_response(400, "expected {\"graph\": \"<id>\"}");
  }
  const auto graph_id = body.at("graph").get<std::string>();
  auto g = graphs_.find(graph_id);
  if (g == graphs_.end()) {
    return error_response(404, "unknown graph '" + graph_id + "'");
  }
  std::unique_lock lock(mutex_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
  auto session = std::make_shared<Session>(buf, graph_id, g->second);
  append_log(session->id, json{{"graph", graph_id}});
  sessions_.emplace(session->id, session);
  return {201, json{{"session_id", session->id}, {"graph", graph_id}}, session->store.revision()};
}

ServiceResponse SessionService::apply(Session& s, const json& body, bool log) {
  const auto revision = s.store.revision();
  if (!body.is_object()) {
    return error_response(400, "expected a JSON object", revision);
  }
  for (const auto& [key, _] : body.items()) {
    if (key != "set" && key != "clear") {
      return error_response(400, "unexpected member '" + key + "'", revision);
    }
  }
  const json set = body.value("set", json::object());
  const json clear = body.value("clear", json::array());
  if (!set.is_object() || !clear.is_array()) {
    return error_response(400, "'set' must be an object and 'clear' an array", revision);
  }

  const auto& graph = *s.graph;
  json diagnostics = json::array();
  std::map<FieldId, std::optional<Value>> changes;
  auto input_decl = [&](const std::string& name) -> const FieldDecl* {
    const FieldId id(name);
    auto idx = graph.find_field(id);
    if (!idx) {
      diagnostics.push_back(field_diagnostic(name, "unknown-field", "unknown field '" + name + "'"));
      return nullptr;
    }
    const auto& decl = graph.field(*idx);
    if (decl.role != FieldRole::Input) {
      diagnostics.push_back(
          field_diagnostic(name, "not-an-input", "'" + name + "' is computed and cannot hold a fact"));
      return nullptr;
    }
    return &decl;
  };
  for (const auto& [name, raw] : set.items()) {
    const auto* decl = input_decl(name);
    if (decl == nullptr) {
      continue;
    }
    std::string error;
    auto v = wire::value_from_json(*decl, raw, error);
    if (!v) {
      diagnostics.push_back(field_diagnostic(name, "kind-mismatch", error));
      continue;
    }
    changes[decl->id] = v->is_unknown() ? std::nullopt : std::optional<Value>(std::move(*v));
  }
  for (const auto& item : clear) {
    if (!item.is_string()) {
      diagnostics.push_back(field_diagnostic("", "bad-request", "'clear' entries must be field ids"));
      continue;
    }
    const auto name = item.get<std::string>();
    const auto* decl = input_decl(name);
    if (decl == nullptr) {
      continue;
    }
    if (set.contains(name)) {
      diagnostics.push_back(field_diagnostic(name, "conflict", "'" + name + "' is both set and cleared"));
      continue;
    }
    changes[decl->id] = std::nullopt;
  }
  if (!diagnostics.empty()) {
    return {422, json{{"diagnostics", std::move(diagnostics)}}, revision};
  }

  for (auto& [field, value] : changes) {
    set_fact(graph, s.store, s.state, field, std::move(value));
  }
  auto result = recompute(graph, s.store, s.state);
  json changed = json::object();
  for (FieldIndex i = 0; i < graph.field_count(); ++i) {
    if (!(result.value(i) == s.last->value(i))) {
      changed[graph.field(i).id.str()] = wire::to_json(result.value(i));
    }
  }
  json unknown = json::array();
  for (const auto& f : result.unknown_fields()) {
    unknown.push_back(f.str());
  }
  json errors = json::array();
  for (const auto& e : result.errors()) {
    errors.push_back(wire::to_json(e));
  }
  s.last.emplace(std::move(result));
  s.updated = std::chrono::system_clock::now();
  if (log) {
    append_log(s.id, json{{"set", set}, {"clear", clear}});
  }
  return {200, json{{"changed", std::move(changed)}, {"unknown", std::move(unknown)}, {"errors", std::move(errors)}},
          s.store.revision()};
}

ServiceResponse SessionService::patch_facts(const std::string& session_id, const json& body) {
  auto s = find(session_id);
  if (!s) {
    return error_response(404, "unknown session '" + session_id + "'");
  }
  std::lock_guard lock(s->mutex);
  return apply(*s, body, true);
}

ServiceResponse SessionService::missing(const std::string& session_id) {
  auto s = find(session_id);
  if (!s) {
    return error_response(404, "unknown session '" + session_id + "'");
  }
  std::lock_guard lock(s->mutex);
  return {200, wire::to_json(missing_report(*s->graph, s->store, *s->last)), s->store.revision()};
}

ServiceResponse SessionService::explain(const std::string& session_id, const std::string& field,
                                        const std::optional<std::string>& depth) {
  auto s = find(session_id);
  if (!s) {
    return error_response(404, "unknown session '" + session_id + "'");
  }
  std::lock_guard lock(s->mutex);
  const auto revision = s->store.revision();
  int d = 1;
  if (depth) {
    const bool digits = !depth->empty() && depth->size() <= 3 &&
                        std::all_of(depth->begin(), depth->end(), [](char c) { return c >= '0' && c <= '9'; });
    d = digits ? std::stoi(*depth) : 0;
    if (d < 1 || d > kMaxExplainDepth) {
      return error_response(400, "depth must be an integer from 1 to " + std::to_string(kMaxExplainDepth), revision);
    }
  }
  const FieldId id(field);
  if (!s->graph->find_field(id)) {
    return error_response(404, "unknown field '" + field + "'", revision);
  }
  return {200, wire::to_json(kg::explain(*s->graph, *s->last, s->store, id, d)), revision};
}

ServiceResponse SessionService::values(const std::string& session_id) {
  auto s = find(session_id);
  if (!s) {
    return error_response(404, "unknown session '" + session_id + "'");
  }
  std::lock_guard lock(s->mutex);
  json values = json::object();
  for (const auto& [field, value] : s->last->values()) {
    values[field.str()] = wire::to_json(value);
  }
  json unknown = json::array();
  for (const auto& f : s->last->unknown_fields()) {
    unknown.push_back(f.str());
  }
  json errors = json::array();
  for (const auto& e : s->last->errors()) {
    errors.push_back(wire::to_json(e));
  }
  return {200, json{{"values", std::move(values)}, {"unknown", std::move(unknown)}, {"errors", std::move(errors)}},
          s->store.revision()};
}

ServiceResponse SessionService::graphs() const {
  json ids = json::array();
  for (const auto& [id, _] : graphs_) {
    ids.push_back(id);
  }
  return {200, json{{"graphs", std::move(ids)}}, std::nullopt};
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

void send(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  if (r.revision) {
    res.set_header("X-KG-Revision", std::to_string(*r.revision));
  }
  res.set_content(r.body.dump(), "application/json");
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  auto body = json::parse(req.body.empty() ? std::string("{}") : req.body, nullptr, false);
  if (body.is_discarded()) {
    send(res, error_response(400, "request body is not valid JSON"));
    return std::nullopt;
  }
  return body;
}

} // namespace

void mount_routes(httplib::Server& server, SessionService& service) {
  server.Post("/v1/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) {
      send(res, service.create_session(*body));
    }
  });
  server.Patch(R"(/v1/sessions/([A-Za-z0-9_]+)/facts)", [&](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parse_body(req, res)) {
      send(res, service.patch_facts(req.matches[1], *body));
    }
  });
  server.Get(R"(/v1/sessions/([A-Za-z0-9_]+)/missing)", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.missing(req.matches[1]));
  });
  server.Get(R"(/v1/sessions/([A-Za-z0-9_]+)/explain/([A-Za-z0-9_.]+))",
             [&](const httplib::Request& req, httplib::Response& res) {
               std::optional<std::string> depth;
               if (req.has_param("depth")) {
                 depth = req.get_param_value("depth");
               }
               send(res, service.explain(req.matches[1], req.matches[2], depth));
             });
  server.Get(R"(/v1/sessions/([A-Za-z0-9_]+)/values)", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.values(req.matches[1]));
  });
  server.Get("/v1/graphs", [&](const httplib::Request&, httplib::Response& res) { send(res, service.graphs()); });
}

} // namespace kg
