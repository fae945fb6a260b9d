#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "sflow/pipeline.hpp"

namespace httplib {
class Server;
}

namespace sflow {

struct ServiceOptions {
  std::size_t capacity = 32;  // sessions kept in memory, least recently used evicted first
  InpaintConfig config;       // base for per-request overrides
};

// In-memory editing sessions behind a JSON-over-HTTP API:
//   POST   /api/session                     image upload (multipart field "image" or raw PNG body)
//   PUT    /api/session/{id}/mask           1-channel PNG, 255 = hole
//   PUT    /api/session/{id}/structure      replaces the completed structure for the next run
//   POST   /api/session/{id}/inpaint        optional JSON config overrides
//   GET    /api/session/{id}/result/{name}  source, mask, structure, s_hat, flow_viz, result, flow
//   DELETE /api/session/{id}
// Status codes: 400 malformed input, 404 unknown session or artifact,
// 409 dimension mismatch, 422 invalid config.
class Service {
 public:
  explicit Service(ServiceOptions opt = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);
  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocks serving `static_dir` (if non-empty) and the API on host:port.
// Returns false if the port cannot be bound.
bool serve(const std::string& host, int port, const std::string& static_dir, ServiceOptions opt = {});

}  // namespace sflow
