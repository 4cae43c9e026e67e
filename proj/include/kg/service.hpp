#pragma once

#include "kg/engine.hpp"
#include "kg/graph_model.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace httplib {
class Server;
}

namespace kg {

using GraphRegistry = std::map<std::string, std::shared_ptr<const KnowledgeGraph>>;

/// Loads every `*.kg.xml` in `dir`, keyed by graph id (the file stem when
/// the document has none). Throws std::runtime_error listing diagnostics
/// of files that fail to load.
GraphRegistry load_graph_directory(const std::filesystem::path& dir);

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
  std::optional<std::uint64_t> revision; // X-KG-Revision
};

/// Transport-independent session API; the HTTP layer only maps routes.
class SessionService {
public:
  /// With a snapshot directory, every accepted fact change is appended to
  /// `<dir>/<session>.jsonl` and existing logs are replayed here.
  explicit SessionService(GraphRegistry graphs, std::optional<std::filesystem::path> snapshot_dir = std::nullopt);
  ~SessionService();

  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  ServiceResponse create_session(const nlohmann::json& body);
  ServiceResponse patch_facts(const std::string& session_id, const nlohmann::json& body);
  ServiceResponse missing(const std::string& session_id);
  ServiceResponse explain(const std::string& session_id, const std::string& field,
                          const std::optional<std::string>& depth);
  ServiceResponse values(const std::string& session_id);
  ServiceResponse graphs() const;

  std::size_t session_count() const;

private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  ServiceResponse apply(Session& s, const nlohmann::json& body, bool log);
  void append_log(const std::string& session_id, const nlohmann::json& record) const;
  void replay();

  GraphRegistry graphs_;
  std::optional<std::filesystem::path> snapshot_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Registers the /v1 routes on `server`.
void mount_routes(httplib::Server& server, SessionService& service);

} // namespace kg
