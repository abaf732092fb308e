// Copyright 2026 The modloco Authors
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

#ifndef MODLOCO_SERVER_H_
#define MODLOCO_SERVER_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modloco/experiment.h"
#include "modloco/sim.h"

namespace modloco {

const char* version();

// One live simulation driven by protocol messages. Owned by a single
// connection and never shared.
class LiveSession {
 public:
  LiveSession(const ServerSettings& settings, const SimConfig& sim);

  // Applies one client message. Returns an error message to send back, if
  // any; a malformed message never ends the session.
  std::optional<nlohmann::json> handle(const std::string& text);

  // Advances one control step unless paused. Returns true if it stepped.
  bool tick();

  nlohmann::json state() const;
  bool paused() const { return paused_; }
  const CpgTopology& topology() const { return topology_; }

 private:
  void restart(std::vector<double> weights);
  std::vector<double> default_weights() const;

  ServerSettings settings_;
  SimConfig sim_;
  std::string robot_;
  std::string scenario_;
  CpgTopology topology_;
  std::unique_ptr<World> world_;
  bool paused_ = false;
};

// HTTP + websocket front end: GET /health, static files from
// settings.static_dir, and the session protocol on /ws.
class Server {
 public:
  Server(ServerSettings settings, SimConfig sim);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting in the background; returns the bound port
  // (useful with port 0).
  unsigned short start();
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modloco

#endif  // MODLOCO_SERVER_H_
