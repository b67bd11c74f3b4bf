#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gesturemap/conceptspace.hpp"
#include "gesturemap/gestures.hpp"
#include "gesturemap/pipeline.hpp"

namespace httplib {
class Server;
}

namespace gesturemap {

struct ServiceOptions {
  std::filesystem::path store_path;
  std::shared_ptr<const Pipeline> pipeline;
  std::shared_ptr<const GestureCatalog> catalog;
  MapperSettings settings;
  std::vector<RawPhrase> corpus;  // phrases reported by GET /unassigned
};

/// Local HTTP curation service over one concept store. Readers work on an
/// immutable snapshot; writers are serialized and each mutation is persisted
/// with an atomic rename before it becomes visible.
///
///   GET    /clusters                   store document
///   GET    /unassigned[?format=tsv]    corpus phrases below tau
///   GET    /preview?phrase=...         full mapping trace
///   POST   /concepts/merge             {"a", "b"}
///   POST   /concepts/{id}/split        {"members": [...], "nameplate"?}
///   PUT    /concepts/{id}/nameplate    {"nameplate"}
///   POST   /concepts/{id}/gestures     {"gesture_id"}
///   POST   /rules                      {"match", "surface", "target", "priority"?, "note"?}
///   DELETE /rules/{id}
///
/// Errors answer {"code", "message"} with status 400, 404 or 500.
class CurationService {
 public:
  /// Throws Error(StoreCorrupt) when the store cannot be loaded.
  explicit CurationService(ServiceOptions options);
  ~CurationService();
  CurationService(const CurationService&) = delete;
  CurationService& operator=(const CurationService&) = delete;

  /// Binds the socket; port 0 picks a free one. Returns the bound port.
  /// Throws Error(PortInUse) when the address is taken.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires bind().
  void listen();
  /// bind() plus listen() on a background thread.
  int start(const std::string& host, int port);
  void stop();

  std::shared_ptr<const ConceptSet> snapshot() const;

  /// The mutation path shared by the HTTP handlers.
  std::shared_ptr<const ConceptSet> apply(const CurationAction& action);

  nlohmann::json unassigned() const;
  nlohmann::json preview(const std::string& phrase) const;

 private:
  void install_routes();

  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  mutable std::mutex snapshot_mutex_;
  std::mutex writer_mutex_;
  std::shared_ptr<const ConceptSet> snapshot_;
};

}  // namespace gesturemap
