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
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>

#include "json.hpp"
#include "netmirror/auth.hpp"
#include "netmirror/bundle.hpp"
#include "netmirror/experiment.hpp"

namespace netmirror {

struct ServiceOptions {
  std::string token_secret;
  std::string admin_token;  // empty disables the admin endpoints
  std::filesystem::path state_snapshot;  // empty disables periodic snapshots
  std::size_t snapshot_every = 0;
};

struct HttpRequest {
  std::string method;
  std::string path;  // no query string
  std::string body;
  std::string authorization;  // raw Authorization header
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent request dispatcher. The bundle is shared read-only;
// every state change goes through the store, which serialises and logs it.
//
// Error mapping: malformed body or invalid value 400, missing or bad token
// 401, action not available to the arm 403, unknown entity 404, out-of-order
// action 409.
class Service {
 public:
  Service(const DatasetBundle& bundle, ExperimentStore& store, ServiceOptions options,
          std::unique_ptr<LoginProvider> login = std::make_unique<IdLoginProvider>());

  HttpResponse handle(const HttpRequest& request);

  const DatasetBundle& bundle() const { return bundle_; }
  ExperimentStore& store() { return store_; }

 private:
  using json = nlohmann::json;

  HttpResponse dispatch(const HttpRequest& request);
  HttpResponse login(const json& body);
  Session authorize(const HttpRequest& request, const std::string& session_id) const;
  void authorize_admin(const HttpRequest& request) const;

  json session_view(const Session& s) const;
  json network_payload(const Session& s) const;
  json recommendations_payload(const Session& s);
  json guess_payload(const Session& s, const GuessOutcome& outcome) const;
  json whatif_payload(const Session& s, const json& body);

  std::string export_payload() const;
  std::string report() const;
  void maybe_snapshot();

  const DatasetBundle& bundle_;
  ExperimentStore& store_;
  ServiceOptions options_;
  std::unique_ptr<LoginProvider> login_;
  TokenSigner signer_;
  double max_pagerank_ = 0.0;

  std::mutex snapshot_mu_;
  std::uint64_t last_snapshot_seq_ = 0;
};

// Session stage as the client sees it: pre_survey, guess, recommend,
// post_survey, demographics, done.
std::string session_stage(const Session& s);

// Blocking HTTP front end over a Service (cpp-httplib, thread pool).
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // port 0 picks a free port. Throws std::runtime_error when the bind fails.
  int bind(const std::string& address, int port);
  // Serves until stop(); returns false on a listen failure.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace netmirror
