#pragma once

#include "forge/serialization.h"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>

namespace forge {

/// Append-only JSONL sink shared by all sessions.
class ResultsLog {
 public:
  ResultsLog() = default;
  explicit ResultsLog(const std::filesystem::path& path);

  void append(const EvalResult& result);

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

struct ServiceConfig {
  SimConfig sim;
  /// Skip RGBD rendering in responses (gps/compass only).
  bool observations = true;
};

/// One client connection: newline-delimited JSON requests in, exactly one
/// JSON response per request out. Never throws on client input.
class Session {
 public:
  Session(const DatasetBundle& bundle, ResultsLog* log, const ServiceConfig& config = {});

  /// Handles one request line and returns the response line (no newline).
  std::string handle(std::string_view line);

  bool closed() const { return closed_; }

 private:
  Json handle_request(const Json& request);
  Json observation_json(const AgentState& state) const;
  Json goal_json() const;

  const DatasetBundle* bundle_;
  ResultsLog* log_;
  ServiceConfig config_;
  Simulator sim_;
  std::uint64_t seq_ = 0;
  const Episode* episode_ = nullptr;
  std::optional<AgentState> state_;
  bool closed_ = false;
};

/// Blocking TCP server; one thread per connection. `port_out` receives the
/// bound port (useful with port 0) once listening. Returns when `stop` is
/// set and a connection attempt or accept timeout wakes the acceptor.
void serve(const DatasetBundle& bundle, const std::string& host, std::uint16_t port,
           ResultsLog* log, const ServiceConfig& config = {},
           std::atomic<std::uint16_t>* port_out = nullptr, const std::atomic<bool>* stop = nullptr);

}  // namespace forge
