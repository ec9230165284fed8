#include "forge/service.h"

#include "forge/image_io.h"

#include <boost/asio.hpp>

#include <thread>

namespace forge {

namespace asio = boost::asio;
using tcp = asio::ip::tcp;

ResultsLog::ResultsLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw IoError("cannot open results log " + path.string());
}

void ResultsLog::append(const EvalResult& result) {
  const std::string line = to_json(result).dump() + "\n";
  std::lock_guard lock(mutex_);
  if (!out_.is_open()) return;
  out_ << line;
  out_.flush();
}

Session::Session(const DatasetBundle& bundle, ResultsLog* log, const ServiceConfig& config)
    : bundle_(&bundle), log_(log), config_(config), sim_(*bundle.scene, *bundle.grid, config.sim) {}

Json Session::observation_json(const AgentState& state) const {
  Json obs;
  const Vec2 gps = sim_.gps(state);
  obs["gps"] = {gps.x(), gps.y()};
  obs["compass"] = sim_.compass(state);
  const SensorSpec& s = config_.sim.sensor;
  obs["sensor"] = {{"height", s.height}, {"hfov", s.hfov}, {"width", s.width}, {"height_px", s.height_px}};
  if (config_.observations) {
    const Observation o = sim_.observe(state);
    obs["rgb"] = {{"width", o.rgbd.width},
                  {"height", o.rgbd.height},
                  {"png", base64_encode(encode_rgb_png(o.rgbd))}};
    obs["depth"] = {{"width", o.rgbd.width},
                    {"height", o.rgbd.height},
                    {"encoding", "rgba8-float32le"},
                    {"png", base64_encode(encode_depth_png(o.rgbd.depth, o.rgbd.width, o.rgbd.height))}};
  }
  return obs;
}

Json Session::goal_json() const {
  // Issuer-frame data only: the camera and its image, never object or viewpoints.
  const GoalCamera& cam = episode_->goal.camera;
  Json goal = {{"camera", to_json(cam)}};
  const Render r = render(*bundle_->scene, cam);
  goal["rgb"] = {{"width", r.width}, {"height", r.height}, {"png", base64_encode(encode_rgb_png(r))}};
  return goal;
}

Json Session::handle_request(const Json& req) {
  if (!req.is_object() || !req.contains("op") || !req["op"].is_string())
    throw ParseError("request must be an object with a string 'op'");
  const std::string op = req["op"].get<std::string>();
  if (op == "reset") {
    if (!req.contains("episode_id") || !req["episode_id"].is_string())
      throw ParseError("reset needs a string 'episode_id'");
    const std::string id = req["episode_id"].get<std::string>();
    const Episode* e = bundle_->find(id);
    if (!e) throw ValidationError("unknown episode_id '" + id + "'");
    state_ = sim_.reset(e->start);
    episode_ = e;
    return {{"type", "reset"},
            {"episode_id", id},
            {"observation", observation_json(*state_)},
            {"goal", goal_json()},
            {"done", false}};
  }
  if (op == "step") {
    if (!req.contains("action") || !req["action"].is_string())
      throw ParseError("step needs a string 'action'");
    const auto action = parse_action(req["action"].get<std::string>());
    if (!action) throw ParseError("unknown action '" + req["action"].get<std::string>() + "'");
    if (!state_) throw ValidationError("no active episode; send reset first");
    if (state_->done) throw ValidationError("episode finished; send reset");
    const StepResult r = sim_.step(*state_, *action);
    state_ = r.state;
    Json resp = {{"type", "step"},
                 {"episode_id", episode_->episode_id},
                 {"observation", observation_json(*state_)},
                 {"collided", r.collided},
                 {"steps", state_->steps},
                 {"done", r.done}};
    if (r.done) {
      const EvalResult result = score_episode(*episode_, *state_);
      if (log_) log_->append(result);
      resp["result"] = to_json(result);
    }
    return resp;
  }
  if (op == "goal_image") {
    if (!episode_) throw ValidationError("no active episode; send reset first");
    return {{"type", "goal_image"}, {"episode_id", episode_->episode_id}, {"goal", goal_json()}};
  }
  if (op == "close") {
    closed_ = true;
    return {{"type", "close"}};
  }
  throw ParseError("unknown op '" + op + "'");
}

std::string Session::handle(std::string_view line) {
  Json resp;
  try {
    resp = handle_request(parse_json(line));
    resp["ok"] = true;
  } catch (const std::exception& e) {
    resp = {{"type", "error"}, {"ok", false}, {"error", e.what()}};
  }
  resp["seq"] = ++seq_;
  try {
    return resp.dump();
  } catch (const Json::exception& e) {
    // Invalid UTF-8 echoed from the request.
    return Json{{"type", "error"}, {"ok", false}, {"error", "response encoding failed"}, {"seq", seq_}}
        .dump(-1, ' ', false, Json::error_handler_t::replace);
  }
}

namespace {

void run_connection(tcp::socket socket, const DatasetBundle& bundle, ResultsLog* log,
                    const ServiceConfig& config) {
  try {
    Session session(bundle, log, config);
    asio::streambuf buffer;
    boost::system::error_code ec;
    while (!session.closed()) {
      asio::read_until(socket, buffer, '\n', ec);
      if (ec) break;
      std::istream in(&buffer);
      std::string line;
      std::getline(in, line);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::string out = session.handle(line) + "\n";
      asio::write(socket, asio::buffer(out), ec);
      if (ec) break;
    }
  } catch (const std::exception&) {
    // Connection-level failure ends this session only.
  }
}

}  // namespace

void serve(const DatasetBundle& bundle, const std::string& host, std::uint16_t port,
           ResultsLog* log, const ServiceConfig& config, std::atomic<std::uint16_t>* port_out,
           const std::atomic<bool>* stop) {
  asio::io_context io;
  tcp::acceptor acceptor(io, tcp::endpoint(asio::ip::make_address(host), port));
  if (port_out) port_out->store(acceptor.local_endpoint().port());
  std::vector<std::thread> workers;
  while (!stop || !stop->load()) {
    tcp::socket socket(io);
    boost::system::error_code ec;
    acceptor.accept(socket, ec);
    if (ec) continue;
    if (stop && stop->load()) break;
    workers.emplace_back(run_connection, std::move(socket), std::cref(bundle), log, config);
  }
  for (auto& w : workers) w.join();
}

}  // namespace forge
