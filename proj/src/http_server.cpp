// Copyright 2026 The Authors.
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
#include <stdexcept>

#include "httplib.h"
#include "netmirror/service.hpp"

namespace netmirror {

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  // Route handlers rather than a pre-routing hook: httplib reads the request
  // body only after pre-routing.
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    r.authorization = req.get_header_value("Authorization");
    const HttpResponse out = impl_->service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const std::string any = ".*";
  impl_->server.Get(any, forward);
  impl_->server.Post(any, forward);
  impl_->server.Put(any, forward);
  impl_->server.Patch(any, forward);
  impl_->server.Delete(any, forward);
  impl_->server.Options(any, forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& address, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(address);
    if (bound < 0) throw std::runtime_error("cannot bind " + address);
    return bound;
  }
  if (!impl_->server.bind_to_port(address, port)) {
    throw std::runtime_error("cannot bind " + address + ":" + std::to_string(port));
  }
  return port;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace netmirror
