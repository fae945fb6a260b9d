#include "sflow/server.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <list>
#include <mutex>
#include <optional>
#include <random>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "sflow/config.hpp"
#include "sflow/error.hpp"
#include "sflow/flowviz.hpp"
#include "sflow/io.hpp"
#include "sflow/losses.hpp"

namespace sflow {

using nlohmann::json;

namespace {

struct Session {
  std::mutex mu;
  std::string id;
  std::vector<std::uint8_t> source_bytes;
  ImageBuffer source;
  Mask mask;
  std::vector<std::uint8_t> mask_bytes;
  std::optional<ImageBuffer> structure;
  std::vector<std::uint8_t> structure_bytes;
  // Encoded artifacts of the last run.
  std::unordered_map<std::string, std::vector<std::uint8_t>> results;
};

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& msg) : std::runtime_error(msg), status(status) {}
  int status;
};

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, {{"error", msg}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension_mismatch:
      return 409;
    case ErrorCode::invalid_config:
      return 422;
    case ErrorCode::io_failure:
    case ErrorCode::unsupported_format:
    case ErrorCode::bad_magic:
    case ErrorCode::invalid_argument:
      return 400;
    default:
      return 500;
  }
}

std::string new_token() {
  static std::mutex mu;
  static std::random_device rd;
  static std::mt19937_64 gen(rd());
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(gen()));
  return buf;
}

ImageBuffer decode_or_400(const std::string& body, const char* what) {
  if (body.empty()) throw HttpError(400, std::string("empty ") + what);
  try {
    const auto* p = reinterpret_cast<const std::uint8_t*>(body.data());
    return decode_image({p, body.size()});
  } catch (const Error& e) {
    throw HttpError(400, std::string("cannot decode ") + what + ": " + e.what());
  }
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

json finite_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

struct Service::Impl {
  ServiceOptions opt;
  mutable std::mutex mu;
  std::list<std::string> lru;  // most recent first
  std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> sessions;

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError(404, "unknown session");
    lru.splice(lru.begin(), lru, it->second.second);
    return it->second.first;
  }

  void insert(const std::shared_ptr<Session>& s) {
    std::lock_guard lock(mu);
    lru.push_front(s->id);
    sessions[s->id] = {s, lru.begin()};
    while (sessions.size() > opt.capacity) {
      sessions.erase(lru.back());
      lru.pop_back();
    }
  }

  bool erase(const std::string& id) {
    std::lock_guard lock(mu);
    const auto it = sessions.find(id);
    if (it == sessions.end()) return false;
    lru.erase(it->second.second);
    sessions.erase(it);
    return true;
  }

  json create(const httplib::Request& req) {
    std::string body;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("image")) throw HttpError(400, "multipart upload needs an \"image\" field");
      body = req.get_file_value("image").content;
    } else {
      body = req.body;
    }
    auto s = std::make_shared<Session>();
    s->source = decode_or_400(body, "image");
    s->source_bytes = bytes_of(body);
    s->mask = Mask(s->source.width(), s->source.height());
    s->id = new_token();
    insert(s);
    return {{"session_id", s->id}, {"width", s->source.width()}, {"height", s->source.height()}};
  }

  void put_mask(Session& s, const std::string& body) {
    const ImageBuffer img = decode_or_400(body, "mask");
    if (img.width() != s.source.width() || img.height() != s.source.height()) {
      throw HttpError(409, "mask size differs from the source image");
    }
    s.mask = image_to_mask(img);
    s.mask_bytes = bytes_of(body);
  }

  void put_structure(Session& s, const std::string& body) {
    ImageBuffer img = decode_or_400(body, "structure");
    // Browser canvases only export colour PNGs.
    if (s.source.channels() == 1 && img.channels() == 3) img = to_gray(img);
    if (img.width() != s.source.width() || img.height() != s.source.height() ||
        img.channels() != s.source.channels()) {
      throw HttpError(409, "structure shape differs from the source image");
    }
    s.structure = img;
    s.structure_bytes = bytes_of(body);
  }

  json run(Session& s, const std::string& body) {
    InpaintConfig cfg = opt.config;
    if (!body.empty()) {
      json j;
      try {
        j = json::parse(body);
      } catch (const json::parse_error& e) {
        throw HttpError(400, std::string("config is not valid JSON: ") + e.what());
      }
      cfg = config_from_json(j, cfg);
    }
    const auto t0 = std::chrono::steady_clock::now();
    InpaintResult r;
    if (s.structure) {
      const ImageBuffer i_in = apply_mask(s.source, s.mask);
      r = generate_texture(i_in, *s.structure, s.mask, cfg);
      r.s_hat = *s.structure;
    } else {
      r = inpaint(s.source, s.mask, cfg);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    s.results["s_hat"] = encode_png(r.s_hat);
    s.results["result"] = encode_png(r.i_hat);
    s.results["flow_viz"] = encode_png(flow_to_color(r.flow));
    s.results["flow"] = encode_flo(r.flow);
    const std::string base = "/api/session/" + s.id + "/result/";
    return {{"metrics",
             {{"hole_ratio", s.mask.ratio()},
              {"psnr", finite_or_inf(psnr(r.i_hat, s.source))},
              {"ssim", ssim(r.i_hat, s.source)},
              {"elapsed_ms", ms}}},
            {"urls",
             {{"s_hat", base + "s_hat"}, {"flow_viz", base + "flow_viz"}, {"result", base + "result"}, {"flow", base + "flow"}}}};
  }

  const std::vector<std::uint8_t>& artifact(Session& s, const std::string& name) {
    if (name == "source") return s.source_bytes;
    if (name == "mask") {
      if (s.mask_bytes.empty()) throw HttpError(404, "no mask uploaded");
      return s.mask_bytes;
    }
    if (name == "structure") {
      if (s.structure_bytes.empty()) throw HttpError(404, "no structure uploaded");
      return s.structure_bytes;
    }
    const auto it = s.results.find(name);
    if (it == s.results.end()) throw HttpError(404, "no artifact '" + name + "'");
    return it->second;
  }
};

Service::Service(ServiceOptions opt) : impl_(std::make_unique<Impl>()) {
  if (opt.capacity == 0) throw Error(ErrorCode::invalid_argument, "session capacity must be positive");
  opt.config.validate();
  impl_->opt = std::move(opt);
}

Service::~Service() = default;

std::size_t Service::session_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->sessions.size();
}

void Service::mount(httplib::Server& server) {
  Impl& impl = *impl_;
  // Maps every failure to a JSON error with the right status code.
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status, e.what());
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, e.what());
      }
    };
  };
  auto with_session = [&impl](const httplib::Request& req) { return impl.find(req.matches[1].str()); };

  server.Post("/api/session", guarded([&impl](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 201, impl.create(req));
              }));
  server.Put(R"(/api/session/([0-9a-f]+)/mask)",
             guarded([&impl, with_session](const httplib::Request& req, httplib::Response& res) {
               const auto s = with_session(req);
               std::lock_guard lock(s->mu);
               impl.put_mask(*s, req.body);
               res.status = 204;
             }));
  server.Put(R"(/api/session/([0-9a-f]+)/structure)",
             guarded([&impl, with_session](const httplib::Request& req, httplib::Response& res) {
               const auto s = with_session(req);
               std::lock_guard lock(s->mu);
               impl.put_structure(*s, req.body);
               res.status = 204;
             }));
  server.Post(R"(/api/session/([0-9a-f]+)/inpaint)",
              guarded([&impl, with_session](const httplib::Request& req, httplib::Response& res) {
                const auto s = with_session(req);
                std::lock_guard lock(s->mu);
                send_json(res, 200, impl.run(*s, req.body));
              }));
  server.Get(R"(/api/session/([0-9a-f]+)/result/([a-z_]+))",
             guarded([&impl, with_session](const httplib::Request& req, httplib::Response& res) {
               const auto s = with_session(req);
               std::lock_guard lock(s->mu);
               const std::string name = req.matches[2].str();
               const auto& bytes = impl.artifact(*s, name);
               res.status = 200;
               res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(),
                               name == "flow" ? "application/octet-stream" : "image/png");
             }));
  server.Delete(R"(/api/session/([0-9a-f]+))",
                guarded([&impl](const httplib::Request& req, httplib::Response& res) {
                  if (!impl.erase(req.matches[1].str())) throw HttpError(404, "unknown session");
                  res.status = 204;
                }));
  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });
}

bool serve(const std::string& host, int port, const std::string& static_dir, ServiceOptions opt) {
  Service service(std::move(opt));
  httplib::Server server;
  service.mount(server);
  if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
    throw Error(ErrorCode::io_failure, "static directory not found: " + static_dir);
  }
  return server.listen(host, port);
}

}  // namespace sflow
