// Copyright 2026 The JITAI Bandit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "jitai/http.hpp"

#include <httplib.h>

namespace jitai {
namespace {

int status_for(ServiceErrorCode code) {
  switch (code) {
    case ServiceErrorCode::Validation:
      return 400;
    case ServiceErrorCode::NotFound:
      return 404;
    case ServiceErrorCode::Conflict:
      return 409;
    case ServiceErrorCode::Schema:
      return 422;
  }
  return 500;
}

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send(res, status, Json{{"error", message}});
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body.empty() ? std::string("{}") : req.body);
  } catch (const Json::parse_error& e) {
    throw ServiceError(ServiceErrorCode::Validation, std::string("request body is not JSON: ") + e.what());
  }
}

std::string required_string(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body.at(key).is_string()) {
    throw ServiceError(ServiceErrorCode::Validation, std::string("field '") + key + "' is required");
  }
  return body.at(key).get<std::string>();
}

template <class F>
httplib::Server::Handler guarded(std::mutex& mutex, F fn) {
  return [&mutex, fn](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex);
    try {
      fn(req, res);
    } catch (const ServiceError& e) {
      send_error(res, status_for(e.code()), e.what());
    } catch (const DomainError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

HttpService::HttpService(Engine& engine) : engine_(engine), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpService::~HttpService() { stop(); }

void HttpService::install_routes() {
  httplib::Server& s = *server_;
  Engine& engine = engine_;

  s.Post("/sessions", guarded(mutex_, [&engine](const httplib::Request& req, httplib::Response& res) {
           const Json body = parse_body(req);
           const std::string id = engine.create_session(required_string(body, "user_id"));
           const Session& session = engine.session(id);
           send(res, 201,
                Json{{"session_id", id},
                     {"user_id", session.user_id},
                     {"created_at", format_rfc3339(session.created_at)}});
         }));

  s.Post(R"(/sessions/([^/]+)/context)",
         guarded(mutex_, [&engine](const httplib::Request& req, httplib::Response& res) {
           const Json body = parse_body(req);
           const auto activity = require_activity(required_string(body, "activity"));
           const auto social = require_social(required_string(body, "social"));
           const Suggestion sg = engine.submit_context(req.matches[1], activity, social);
           send(res, 200,
                Json{{"session_id", sg.session_id},
                     {"intervention_id", sg.intervention_id},
                     {"name", sg.name},
                     {"category", to_token(sg.category)},
                     {"prompt_text", sg.prompt_text},
                     {"activity", to_token(sg.context)},
                     {"social", to_token(sg.social)},
                     {"suggested_at", format_rfc3339(sg.suggested_at)}});
         }));

  s.Post(R"(/sessions/([^/]+)/response)",
         guarded(mutex_, [&engine](const httplib::Request& req, httplib::Response& res) {
           const Json body = parse_body(req);
           const std::string token = required_string(body, "response");
           const auto response = parse_response(token);
           if (!response || *response == Response::Missed) {
             throw ServiceError(ServiceErrorCode::Validation,
                                "unknown response '" + token + "' (expected yes, no or not_feasible)");
           }
           const ResponseAck ack = engine.submit_response(req.matches[1], *response);
           send(res, 200,
                Json{{"session_id", ack.session_id},
                     {"intervention_id", ack.intervention_id},
                     {"response", to_token(ack.response)},
                     {"reward", ack.reward},
                     {"alpha", ack.posterior.alpha},
                     {"beta", ack.posterior.beta},
                     {"posterior_mean", ack.posterior.mean()}});
         }));

  s.Get(R"(/sessions/([^/]+)/state)", guarded(mutex_, [&engine](const httplib::Request& req, httplib::Response& res) {
          const std::string id = req.matches[1];
          engine.expire_due(id);
          send(res, 200, engine.session_state(id));
        }));

  s.Get("/admin/snapshot", guarded(mutex_, [&engine](const httplib::Request&, httplib::Response& res) {
          send(res, 200, engine.snapshot());
        }));

  s.Post("/admin/restore", guarded(mutex_, [&engine](const httplib::Request& req, httplib::Response& res) {
           engine.restore(parse_body(req));
           send(res, 200, Json{{"restored", true}, {"seq", engine.seq()}});
         }));
}

int HttpService::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpService::listen() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

bool HttpService::running() const { return server_->is_running(); }

}  // namespace jitai
