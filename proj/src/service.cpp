#include "gesturemap/service.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gesturemap/error.hpp"

namespace gesturemap {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownGesture: return 404;
    case ErrorCode::InvalidInput:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidSplit:
    case ErrorCode::InvalidRule:
    case ErrorCode::OutOfRange:
    case ErrorCode::EmptyInput: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"code", error_code_name(code)}, {"message", message}}, status_for(code));
}

json parse_body(const httplib::Request& req) {
  json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
  return doc;
}

std::string field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidInput, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

json concept_reply(const ConceptSet& set, const std::string& id) {
  const Concept* c = set.find(id);
  return {{"concept", c ? to_json(*c) : json(nullptr)}, {"log_size", set.log().size()}};
}

// Runs a handler and turns library errors into JSON error bodies.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::ParseError, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::IoError, e.what());
    }
  };
}

}  // namespace

CurationService::CurationService(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.pipeline) throw Error(ErrorCode::InvalidInput, "service needs a pipeline");
  if (!options_.catalog) options_.catalog = std::make_shared<const GestureCatalog>();
  try {
    snapshot_ = std::make_shared<const ConceptSet>(load_concept_store(options_.store_path));
  } catch (const Error& e) {
    throw Error(ErrorCode::StoreCorrupt, std::string("refusing to start: ") + e.what());
  }
  if (!snapshot_->empty() && snapshot_->dim() != options_.pipeline->dim()) {
    throw Error(ErrorCode::StoreCorrupt, "refusing to start: store dimension " + std::to_string(snapshot_->dim()) +
                                             " does not match the vector store (" +
                                             std::to_string(options_.pipeline->dim()) + ")");
  }
  server_ = std::make_unique<httplib::Server>();
  // httplib's defaults add SO_REUSEPORT, which would let a second service share the port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  install_routes();
}

CurationService::~CurationService() { stop(); }

std::shared_ptr<const ConceptSet> CurationService::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

std::shared_ptr<const ConceptSet> CurationService::apply(const CurationAction& action) {
  std::lock_guard writer(writer_mutex_);
  const auto current = snapshot();
  if (const auto* g = std::get_if<curation::AttachGesture>(&action);
      g != nullptr && !options_.catalog->empty() && options_.catalog->find(g->gesture_id) == nullptr) {
    throw Error(ErrorCode::UnknownGesture, "gesture '" + g->gesture_id + "' is not in the catalog");
  }
  auto next = std::make_shared<const ConceptSet>(
      apply_curation(*current, action, embedder_for(*options_.pipeline), current_timestamp()));
  save_concept_store(options_.store_path, *next);
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = next;
  return next;
}

json CurationService::unassigned() const {
  const auto set = snapshot();
  json rows = json::array();
  for (const auto& p : options_.corpus) {
    const Assignment a = assign(p, *set, set->rules(), options_.settings.tau, *options_.pipeline);
    if (a.assigned()) continue;
    rows.push_back({{"phrase_id", p.id},
                    {"text", p.text},
                    {"best_similarity", a.best_similarity},
                    {"nearest_concept", a.nearest_concept}});
  }
  return {{"phrases", std::move(rows)}, {"tau", options_.settings.tau}};
}

json CurationService::preview(const std::string& phrase) const {
  GestureMapper mapper(options_.pipeline, snapshot(), options_.catalog, options_.settings);
  return to_json(mapper.map(RawPhrase{"preview", phrase}));
}

void CurationService::install_routes() {
  auto& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/clusters", guarded([this](const httplib::Request&, httplib::Response& res) {
          send_json(res, to_json(*snapshot()));
        }));

  s.Get("/unassigned", guarded([this](const httplib::Request& req, httplib::Response& res) {
          if (req.get_param_value("format") == "tsv") {
            const auto set = snapshot();
            std::vector<Assignment> all;
            for (const auto& p : options_.corpus) {
              all.push_back(assign(p, *set, set->rules(), options_.settings.tau, *options_.pipeline));
            }
            res.set_content(export_unassigned(options_.corpus, all), "text/tab-separated-values; charset=utf-8");
            return;
          }
          send_json(res, unassigned());
        }));

  s.Get("/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
          if (!req.has_param("phrase")) throw Error(ErrorCode::InvalidInput, "missing query parameter 'phrase'");
          send_json(res, preview(req.get_param_value("phrase")));
        }));

  s.Post("/concepts/merge", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           const std::string a = field(body, "a");
           const auto set = apply(curation::Merge{a, field(body, "b")});
           send_json(res, concept_reply(*set, a));
         }));

  s.Post(R"(/concepts/([^/]+)/split)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           curation::Split split;
           split.id = req.matches[1];
           if (!body.contains("members") || !body["members"].is_array()) {
             throw Error(ErrorCode::InvalidInput, "missing array field 'members'");
           }
           split.members = body["members"].get<std::vector<std::string>>();
           if (body.contains("nameplate")) split.nameplate = field(body, "nameplate");
           const auto set = apply(split);
           json reply = concept_reply(*set, split.id);
           // Ids are allocated in increasing order, so the new concept sorts last.
           reply["created"] = to_json(set->concepts().back());
           send_json(res, reply);
         }));

  s.Put(R"(/concepts/([^/]+)/nameplate)", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const json body = parse_body(req);
          const std::string id = req.matches[1];
          const auto set = apply(curation::Rename{id, field(body, "nameplate")});
          send_json(res, concept_reply(*set, id));
        }));

  s.Post(R"(/concepts/([^/]+)/gestures)", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const json body = parse_body(req);
           const std::string id = req.matches[1];
           const auto set = apply(curation::AttachGesture{id, field(body, "gesture_id")});
           send_json(res, concept_reply(*set, id));
         }));

  s.Post("/rules", guarded([this](const httplib::Request& req, httplib::Response& res) {
           json body = parse_body(req);
           if (!body.contains("priority")) body["priority"] = 0;
           OverrideRule rule = rule_from_json(body);
           const auto current = snapshot();
           if (!current->find(rule.target_concept_id)) {
             if (const Concept* c = current->find_by_nameplate(rule.target_concept_id)) rule.target_concept_id = c->id;
           }
           rule.id.clear();
           const auto set = apply(curation::AddRule{rule});
           send_json(res, {{"rule", to_json(set->rules().back())}, {"log_size", set->log().size()}}, 201);
         }));

  s.Delete(R"(/rules/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const auto set = apply(curation::RemoveRule{id});
             send_json(res, {{"removed", id}, {"log_size", set->log().size()}});
           }));
}

int CurationService::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port) + " (address in use)");
  }
  return bound;
}

void CurationService::listen() { server_->listen_after_bind(); }

int CurationService::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return bound;
}

void CurationService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace gesturemap
