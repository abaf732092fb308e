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

#include "modloco/server.h"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <list>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "modloco/error.h"

namespace modloco {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using nlohmann::json;

const char* version() { return MODLOCO_VERSION; }

namespace {

json error_message(const std::string& msg) { return {{"type", "error"}, {"msg", msg}}; }

double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw InputError(std::string("field '") + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw InputError(std::string("field '") + key + "' must be finite");
  return v;
}

// Maximum queued outbound frames before state frames are dropped.
constexpr std::size_t kMaxQueue = 64;

std::string content_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

}  // namespace

LiveSession::LiveSession(const ServerSettings& settings, const SimConfig& sim)
    : settings_(settings), sim_(sim), robot_(settings.robot), scenario_(settings.scenario) {
  topology_ = cpg_topology(resolve_body(robot_));
  restart(default_weights());
}

std::vector<double> LiveSession::default_weights() const {
  const auto path = settings_.genome_dir / (robot_ + ".json");
  if (std::filesystem::exists(path)) {
    try {
      GenomeFile g = load_genome(path);
      if (static_cast<int>(g.weights.size()) == topology_.genome_dimension())
        return g.weights;
    } catch (const Error&) {
    }
  }
  std::vector<double> w(topology_.genome_dimension(), 0.0);
  std::fill(w.begin(), w.begin() + topology_.num_joints(), 1.0);
  return w;
}

void LiveSession::restart(std::vector<double> weights) {
  const Scenario scenario = scenario_preset(scenario_);
  const RobotSetup setup{topology_, CpgGenome::from_flat(topology_, weights)};
  std::optional<Point> target;
  if (world_) target = world_->external_target();
  world_ = std::make_unique<World>(std::vector<RobotSetup>(scenario.robots.size(), setup),
                                   scenario, sim_, 0);
  world_->set_keep_history(false);
  if (target) world_->set_external_target(*target);
}

std::optional<json> LiveSession::handle(const std::string& text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::exception&) {
    return error_message("malformed JSON");
  }
  if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string())
    return error_message("message needs a string 'type'");
  const std::string type = msg.at("type").get<std::string>();
  try {
    if (type == "set_target") {
      world_->set_external_target({finite_number(msg, "x"), finite_number(msg, "y")});
    } else if (type == "pause") {
      paused_ = true;
    } else if (type == "resume") {
      paused_ = false;
    } else if (type == "reset") {
      std::string robot = robot_, scenario = scenario_;
      if (msg.contains("robot")) robot = msg.at("robot").get<std::string>();
      if (msg.contains("scenario")) scenario = msg.at("scenario").get<std::string>();
      CpgTopology topology = cpg_topology(resolve_body(robot));
      scenario_preset(scenario);
      robot_ = robot;
      scenario_ = scenario;
      topology_ = std::move(topology);
      world_.reset();
      restart(default_weights());
    } else if (type == "load_genome") {
      if (!msg.contains("weights") || !msg.at("weights").is_array())
        return error_message("load_genome needs a 'weights' array");
      const auto weights = msg.at("weights").get<std::vector<double>>();
      if (static_cast<int>(weights.size()) != topology_.genome_dimension())
        return error_message("genome has " + std::to_string(weights.size()) +
                             " weights, robot '" + robot_ + "' needs " +
                             std::to_string(topology_.genome_dimension()));
      CpgGenome::from_flat(topology_, weights);
      restart(weights);
    } else {
      return error_message("unknown message type '" + type + "'");
    }
  } catch (const Error& e) {
    return error_message(e.what());
  } catch (const json::exception& e) {
    return error_message(std::string("bad field: ") + e.what());
  }
  return std::nullopt;
}

bool LiveSession::tick() {
  if (paused_) return false;
  world_->step();
  return true;
}

json LiveSession::state() const {
  json robots = json::array();
  for (int i = 0; i < world_->num_robots(); ++i) {
    const TraceRow& row = world_->latest(i);
    robots.push_back({{"x", row.pose.x},
                      {"y", row.pose.y},
                      {"theta", row.pose.theta},
                      {"alpha", row.alpha_deg},
                      {"signals", row.signals}});
  }
  const Point target = world_->latest(0).target;
  return {{"type", "state"},
          {"t", world_->time()},
          {"robots", std::move(robots)},
          {"target", {{"x", target.x}, {"y", target.y}}}};
}

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(asio::io_context& ioc, const ServerSettings& settings, const SimConfig& sim)
      : ioc_(ioc), settings_(settings), sim_(sim), timer_(ioc) {}

  void start(tcp::socket socket) {
    socket_.emplace(std::move(socket));
    read_request();
  }

 private:
  void read_request() {
    req_ = {};
    http::async_read(*socket_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->on_request(ec);
                     });
  }

  void on_request(beast::error_code ec) {
    if (ec) return close_socket();
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/ws") return respond(http::status::not_found, "no such socket\n",
                                                 "text/plain");
      ws_.emplace(std::move(*socket_));
      socket_.reset();
      ws_->async_accept(req_, [self = shared_from_this()](beast::error_code ec) {
        self->on_ws_accept(ec);
      });
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head)
      return respond(http::status::method_not_allowed, "GET only\n", "text/plain");
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (target == "/health") {
      const json body{{"status", "ok"}, {"version", version()}};
      return respond(http::status::ok, body.dump(), "application/json");
    }
    serve_static(target);
  }

  void serve_static(std::string target) {
    if (settings_.static_dir.empty() || target.empty() || target[0] != '/' ||
        target.find("..") != std::string::npos)
      return respond(http::status::not_found, "not found\n", "text/plain");
    if (target.back() == '/') target += "index.html";
    const auto path = settings_.static_dir / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!std::filesystem::is_regular_file(path) || !in)
      return respond(http::status::not_found, "not found\n", "text/plain");
    std::ostringstream body;
    body << in.rdbuf();
    respond(http::status::ok, body.str(), content_type(path));
  }

  void respond(http::status status, std::string body, const std::string& type) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::server, std::string("modloco/") + version());
    res->set(http::field::content_type, type);
    res->keep_alive(req_.keep_alive());
    if (req_.method() != http::verb::head) res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(*socket_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec || !res->keep_alive()) return self->close_socket();
                        self->read_request();
                      });
  }

  void close_socket() {
    if (!socket_) return;
    beast::error_code ignored;
    socket_->shutdown(tcp::socket::shutdown_send, ignored);
    socket_->close(ignored);
  }

  void on_ws_accept(beast::error_code ec) {
    if (ec) return;
    try {
      session_.emplace(settings_, sim_);
    } catch (const Error& e) {
      send(error_message(e.what()).dump());
      return;
    }
    send(session_->state().dump());
    read_message();
    period_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(sim_.dt_ctrl));
    next_ = std::chrono::steady_clock::now() + period_;
    schedule();
  }

  void schedule() {
    timer_.expires_at(next_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      // Client messages were applied by the read handler between ticks.
      if (self->session_->tick() && self->queue_.size() < kMaxQueue)
        self->send(self->session_->state().dump());
      self->next_ += self->period_;
      self->schedule();
    });
  }

  void read_message() {
    ws_->async_read(rbuf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->shut();
      const std::string text = beast::buffers_to_string(self->rbuf_.data());
      self->rbuf_.consume(self->rbuf_.size());
      if (auto err = self->session_->handle(text)) self->send(err->dump());
      self->read_message();
    });
  }

  void send(std::string frame) {
    if (closed_) return;
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) write_next();
  }

  void write_next() {
    ws_->text(true);
    ws_->async_write(asio::buffer(queue_.front()),
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (ec) return self->shut();
                       self->queue_.pop_front();
                       if (!self->queue_.empty()) self->write_next();
                     });
  }

  void shut() {
    closed_ = true;
    timer_.cancel();
    if (ws_) {
      beast::error_code ignored;
      beast::get_lowest_layer(*ws_).close(ignored);
    }
  }

  asio::io_context& ioc_;
  const ServerSettings& settings_;
  const SimConfig& sim_;
  std::optional<tcp::socket> socket_;
  std::optional<websocket::stream<tcp::socket>> ws_;
  beast::flat_buffer buffer_;
  beast::flat_buffer rbuf_;
  http::request<http::string_body> req_;
  asio::steady_timer timer_;
  std::chrono::steady_clock::duration period_{};
  std::chrono::steady_clock::time_point next_;
  std::optional<LiveSession> session_;
  std::deque<std::string> queue_;
  bool closed_ = false;
};

}  // namespace

struct Server::Impl {
  struct Slot {
    std::unique_ptr<asio::io_context> ioc;
    std::thread thread;
  };

  ServerSettings settings;
  SimConfig sim;
  asio::io_context accept_ioc;
  tcp::acceptor acceptor{accept_ioc};
  std::thread accept_thread;
  std::mutex mu;
  std::condition_variable stopped_cv;
  std::list<Slot> slots;
  bool running = false;

  void accept() {
    auto ioc = std::make_unique<asio::io_context>();
    asio::io_context& ref = *ioc;
    acceptor.async_accept(ref, [this, ioc = std::move(ioc)](beast::error_code ec,
                                                             tcp::socket socket) mutable {
      if (ec) return;
      auto conn = std::make_shared<Connection>(*ioc, settings, sim);
      conn->start(std::move(socket));
      {
        std::lock_guard lock(mu);
        Slot& slot = slots.emplace_back();
        slot.ioc = std::move(ioc);
        asio::io_context* raw = slot.ioc.get();
        slot.thread = std::thread([raw] { raw->run(); });
      }
      accept();
    });
  }
};

Server::Server(ServerSettings settings, SimConfig sim) : impl_(std::make_unique<Impl>()) {
  check_config(sim);
  impl_->settings = std::move(settings);
  impl_->sim = sim;
}

Server::~Server() { stop(); }

unsigned short Server::start() {
  Impl& s = *impl_;
  const auto address = asio::ip::make_address(s.settings.host);
  const tcp::endpoint endpoint(address, static_cast<unsigned short>(s.settings.port));
  s.acceptor.open(endpoint.protocol());
  s.acceptor.set_option(asio::socket_base::reuse_address(true));
  beast::error_code ec;
  s.acceptor.bind(endpoint, ec);
  if (ec) throw Error("cannot bind " + s.settings.host + ":" +
                      std::to_string(s.settings.port) + ": " + ec.message());
  s.acceptor.listen();
  const unsigned short port = s.acceptor.local_endpoint().port();
  s.running = true;
  s.accept();
  s.accept_thread = std::thread([&s] { s.accept_ioc.run(); });
  return port;
}

void Server::stop() {
  Impl& s = *impl_;
  {
    std::lock_guard lock(s.mu);
    if (!s.running) return;
    s.running = false;
  }
  asio::post(s.accept_ioc, [&s] {
    beast::error_code ignored;
    s.acceptor.close(ignored);
  });
  s.accept_thread.join();
  s.accept_ioc.stop();
  std::list<Impl::Slot> slots;
  {
    std::lock_guard lock(s.mu);
    slots.swap(s.slots);
  }
  for (auto& slot : slots) slot.ioc->stop();
  for (auto& slot : slots) slot.thread.join();
  slots.clear();
  s.stopped_cv.notify_all();
}

void Server::wait() {
  Impl& s = *impl_;
  std::unique_lock lock(s.mu);
  s.stopped_cv.wait(lock, [&s] { return !s.running; });
}

}  // namespace modloco
