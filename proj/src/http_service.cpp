#include <httplib.h>

#include <spdlog/spdlog.h>

#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"
#include "ldpjudge/service.hpp"

namespace ldpjudge {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::kValidation, "request body must be a JSON object");
    return body;
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::kValidation, "request body is not JSON");
  }
}

template <typename T>
T body_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end()) {
    throw Error(ErrorCode::kValidation, std::string("missing field '") + name + "'",
                {{"field", name}});
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kValidation, std::string("field '") + name + "' has the wrong type",
                {{"field", name}});
  }
}

std::optional<double> query_double(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const std::string raw = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const double value = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return value;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("query parameter '") + name +
                                                 "' is not a number",
                {{"parameter", name}, {"value", raw}});
  }
}

}  // namespace

struct AnnotationServer::Impl {
  std::shared_ptr<AnnotationService> service;
  std::map<std::string, std::string> tokens;
  httplib::Server server;

  std::string reviewer(const httplib::Request& req) const {
    const std::string header = req.get_header_value("Authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (header.compare(0, kBearer.size(), kBearer) != 0) {
      throw Error(ErrorCode::kAuthentication, "missing bearer token");
    }
    auto it = tokens.find(header.substr(kBearer.size()));
    if (it == tokens.end()) throw Error(ErrorCode::kAuthentication, "unknown bearer token");
    return it->second;
  }

  // Sessions belong to one reviewer; others see them as absent.
  AnnotationSession owned(const std::string& session_id, const std::string& who) const {
    auto session = service->get_session(session_id);
    if (session.reviewer_id != who) {
      throw Error(ErrorCode::kNotFound, "unknown session " + session_id,
                  {{"session_id", session_id}});
    }
    return session;
  }

  template <typename Handler>
  httplib::Server::Handler guarded(Handler handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_json(res, http_status_for(e.code()), error_body(e));
      } catch (const std::exception& e) {
        spdlog::error("annotation server: {}", e.what());
        send_json(res, 500, {{"code", "internal"}, {"message", e.what()}, {"details", json::object()}});
      }
    };
  }

  void routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string who = reviewer(req);
      const json body = parse_body(req);
      auto [session, created] = service->create_session(body_field<std::string>(body, "qa_id"), who);
      send_json(res, created ? 201 : 200, service->session_payload(session));
    }));

    server.Get(R"(/sessions/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto session = owned(req.matches[1], reviewer(req));
                 send_json(res, 200, service->session_payload(session));
               }));

    server.Put(R"(/sessions/([^/]+)/ldps/(\d+)/tag)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string id = req.matches[1];
                 owned(id, reviewer(req));
                 const json body = parse_body(req);
                 const auto tag = parse_tag(body_field<std::string>(body, "tag"));
                 if (!tag) {
                   throw Error(ErrorCode::kValidation, "unknown tag", {{"field", "tag"}});
                 }
                 std::size_t index = 0;
                 try {
                   index = std::stoul(req.matches[2]);
                 } catch (const std::exception&) {
                   throw Error(ErrorCode::kInvalidArgument, "ldp index out of range");
                 }
                 const auto session =
                     service->record_tag(id, index, *tag, body_field<std::int64_t>(body, "version"));
                 send_json(res, 200, service->session_payload(session));
               }));

    server.Post(R"(/sessions/([^/]+)/ldps)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  owned(id, reviewer(req));
                  const json body = parse_body(req);
                  std::optional<std::string> citation;
                  if (body.contains("citation") && !body["citation"].is_null()) {
                    citation = body_field<std::string>(body, "citation");
                  }
                  const auto session = service->add_missing_ldp(
                      id, body_field<std::string>(body, "text"),
                      body_field<std::int64_t>(body, "version"), std::move(citation));
                  send_json(res, 201, service->session_payload(session));
                }));

    server.Post(R"(/sessions/([^/]+)/submit)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  owned(id, reviewer(req));
                  const json body = parse_body(req);
                  auto [session, result] =
                      service->submit(id, body_field<std::int64_t>(body, "version"));
                  send_json(res, 200, AnnotationService::submit_payload(session, result));
                }));

    server.Get("/reports/triage",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 reviewer(req);
                 TriageConfig config = service->default_triage();
                 if (auto v = query_double(req, "relevance_threshold")) {
                   config.relevance_threshold = *v;
                 }
                 if (auto v = query_double(req, "correctness_threshold")) {
                   config.correctness_threshold = *v;
                 }
                 const auto report =
                     service->triage_report(config, query_double(req, "baseline_hours"));
                 send_json(res, 200, to_json_value(report));
               }));
  }
};

AnnotationServer::AnnotationServer(std::shared_ptr<AnnotationService> service,
                                   std::map<std::string, std::string> tokens)
    : impl_(std::make_unique<Impl>()) {
  if (!service) throw Error(ErrorCode::kInvalidArgument, "server needs a service");
  impl_->service = std::move(service);
  impl_->tokens = std::move(tokens);
  impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

void AnnotationServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace ldpjudge
