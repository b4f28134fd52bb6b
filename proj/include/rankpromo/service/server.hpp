#pragma once

// HTTP routes over CompetitionService, plus the static mount for the web UI.

#include <httplib.h>

#include <filesystem>
#include <string>

#include "rankpromo/service/service.hpp"

namespace rankpromo::service {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message,
                       const json& details = nullptr) {
  json body{{"error", message}};
  if (!details.is_null()) body["details"] = details;
  send_json(res, status, body);
}

inline json parse_body(const httplib::Request& req, bool allow_empty = false) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw ServiceError(400, "request body must be a JSON object");
  }
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ServiceError(400, std::string("malformed JSON: ") + e.what());
  }
}

/// Session token from the X-Session-Token header or a "token" field/param.
inline std::string session_token(const httplib::Request& req, const json& body = nullptr) {
  if (req.has_header("X-Session-Token")) return req.get_header_value("X-Session-Token");
  if (body.is_object() && body.contains("token") && body["token"].is_string()) {
    return body["token"].get<std::string>();
  }
  if (req.has_param("token")) return req.get_param_value("token");
  return {};
}

inline std::string admin_token(const httplib::Request& req) {
  if (req.has_header("X-Admin-Token")) return req.get_header_value("X-Admin-Token");
  const auto auth = req.get_header_value("Authorization");
  if (auth.rfind("Bearer ", 0) == 0) return auth.substr(7);
  return {};
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.what(), e.details());
    } catch (const ValidationError& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace detail

/// SO_REUSEADDR only. The library default also sets SO_REUSEPORT, which would
/// let a second instance silently share a busy port.
inline void exclusive_port(httplib::Server& server) {
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
}

/// Registers every route on `server`. `static_dir`, when it exists, is
/// served at "/".
inline void install_routes(httplib::Server& server, CompetitionService& svc,
                           const std::string& static_dir = "") {
  using detail::guarded;
  using detail::send_json;

  server.Post("/competitions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto created = svc.create(detail::parse_body(req));
    send_json(res, 201, json{{"id", created.id}, {"tokens", created.tokens}});
  }));
  server.Get(R"(/competitions/([^/]+))",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, svc.get(req.matches[1]));
             }));
  server.Post(R"(/competitions/([^/]+)/submissions)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const auto body = detail::parse_body(req);
                const auto text = optional_field<std::string>(body, "text", "");
                send_json(res, 200, svc.submit(req.matches[1], detail::session_token(req, body), text));
              }));
  server.Get(R"(/competitions/([^/]+)/ranking)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               auto token = detail::session_token(req);
               if (token.empty()) token = detail::admin_token(req);
               send_json(res, 200, svc.ranking(req.matches[1], token));
             }));
  server.Post(R"(/competitions/([^/]+)/advance)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const auto body = detail::parse_body(req, true);
                const bool force = optional_field<bool>(body, "force", false);
                send_json(res, 200, svc.advance(req.matches[1], detail::admin_token(req), force));
              }));
  server.Get(R"(/competitions/([^/]+)/report)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, svc.report(req.matches[1]));
             }));
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir)) {
    server.set_mount_point("/", static_dir);
  }
}

}  // namespace rankpromo::service
