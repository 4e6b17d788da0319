// Copyright 2026 The PhaseForge Authors.
//
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

#include "phaseforge/http_server.hpp"

#include <thread>

#include <httplib.h>

#include "phaseforge/error.hpp"

namespace phaseforge {

struct HttpServer::Impl {
  InspectorService& service;
  HttpServerOptions options;
  httplib::Server server;
  std::thread worker;
  int bound_port = 0;

  Impl(InspectorService& s, HttpServerOptions o) : service(s), options(std::move(o)) {}

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    ServiceRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    request.body = req.body;
    request.authorization = req.get_header_value("Authorization");
    const ServiceResponse response = service.handle(request);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  }

  void install() {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      dispatch(req, res);
    };
    const std::string api = R"(/api/.*)";
    server.Get(api, handler);
    server.Post(api, handler);
    server.Put(api, handler);
    server.Delete(api, handler);
    if (!options.ui_dir.empty()) {
      if (!server.set_mount_point("/", options.ui_dir.string())) {
        throw Error(ErrorCode::kNotFound,
                    "UI directory not found: " + options.ui_dir.string());
      }
    } else {
      server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("phaseforge inspector API; see /api/spec\n", "text/plain");
      });
    }
  }

  int bind() {
    if (options.port == 0) {
      bound_port = server.bind_to_any_port(options.host);
    } else if (server.bind_to_port(options.host, options.port)) {
      bound_port = options.port;
    } else {
      bound_port = -1;
    }
    if (bound_port <= 0) {
      throw Error(ErrorCode::kIoError, "cannot bind " + options.host + ":" +
                                           std::to_string(options.port));
    }
    return bound_port;
  }
};

HttpServer::HttpServer(InspectorService& service, HttpServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  if (!impl_->options.token.empty()) {
    service.set_authorizer([token = impl_->options.token](std::string_view t) {
      return t == token;
    });
  }
  impl_->install();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::listen() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

int HttpServer::start() {
  const int port = impl_->bind();
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

int HttpServer::port() const { return impl_->bound_port; }

}  // namespace phaseforge
