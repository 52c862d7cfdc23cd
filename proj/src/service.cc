#include "mantra/service.h"

#include <cstdlib>
#include <iostream>
#include <thread>

#include "mantra/errors.h"
#include "mantra/json_api.h"
#include "mantra/mol_graph.h"

// after Eigen: <resolv.h> defines _res
#include "httplib.h"

namespace mantra {

struct Service::Session {
  std::unique_ptr<Bundle> bundle;
  std::unique_ptr<Navigator> navigator;
  std::string projection;  // serialized once
};

namespace {

ApiResponse reply(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse fail(int status, const std::string& error, const std::string& detail) {
  return reply(status, error_json(error, detail));
}

Json parse_body(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw RequestError(std::string("body is not valid JSON: ") + e.what());
  }
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& s : parts) out += (out.empty() ? "" : "; ") + s;
  return out;
}

}  // namespace

ServiceConfig ServiceConfig::from_env(ServiceConfig c) {
  if (const char* v = std::getenv("PORT")) {
    char* end = nullptr;
    long port = std::strtol(v, &end, 10);
    if (*v == '\0' || *end != '\0' || port < 0 || port > 65535) {
      throw std::invalid_argument(std::string("PORT must be an integer in [0, 65535], got '") + v + "'");
    }
    c.port = static_cast<int>(port);
  }
  if (const char* v = std::getenv("INDEX_PATH")) c.index_path = v;
  if (const char* v = std::getenv("GRAMMAR_PATH")) c.grammar_path = v;
  if (const char* v = std::getenv("WEIGHTS_PATH")) c.weights_path = v;
  return c;
}

ServiceConfig ServiceConfig::from_env() { return from_env(ServiceConfig{}); }

Service::Service() = default;
Service::~Service() = default;

void Service::attach(std::unique_ptr<Bundle> bundle) {
  auto s = std::make_shared<Session>();
  s->bundle = std::move(bundle);
  const Bundle& b = *s->bundle;
  s->navigator = std::make_unique<Navigator>(TraversalContext{b.index, *b.decoder, *b.decoder, b.grammar, b.table});
  if (b.index.size() > TraversalRequest{}.n) s->navigator->base_graph(TraversalRequest{}.n);
  s->projection = projection_json(b.index, pca_2d(b.index.coords())).dump();
  std::lock_guard lock(mu_);
  session_ = std::move(s);
}

void Service::load(const ServiceConfig& config) {
  if (config.index_path.empty()) throw std::invalid_argument("no index path configured (INDEX_PATH or --index)");
  Grammar g = config.grammar_path ? load_grammar_file(*config.grammar_path) : default_grammar();
  attach(load_bundle(config.index_path, g, config.weights_path));
}

bool Service::ready() const { return session() != nullptr; }

std::shared_ptr<const Service::Session> Service::session() const {
  std::lock_guard lock(mu_);
  return session_;
}

ApiResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) const {
  auto s = session();
  const bool get = method == "GET", post = method == "POST";
  auto not_ready = [] { return fail(503, "not ready", "index is still loading"); };
  try {
    if (path == "/api/health") {
      if (!get) return fail(405, "method not allowed", "use GET");
      if (!s) return not_ready();
      return reply(200, {{"status", "ok"}, {"records", s->bundle->index.size()}, {"dim", s->bundle->index.dim()}});
    }
    const bool known = path == "/api/encode" || path == "/api/decode" || path == "/api/traverse" ||
                       path == "/api/projection" || path == "/api/labels" || path.rfind("/api/compound/", 0) == 0;
    if (!known) return fail(404, "not found", "no endpoint " + path);
    const bool wants_post = path == "/api/encode" || path == "/api/decode" || path == "/api/traverse";
    if (wants_post ? !post : !get) return fail(405, "method not allowed", wants_post ? "use POST" : "use GET");
    if (!s) return not_ready();
    const Bundle& b = *s->bundle;

    if (path == "/api/projection") return {200, s->projection};
    if (path == "/api/labels") return reply(200, labels_json(b.index));
    if (path.rfind("/api/compound/", 0) == 0) {
      std::string id = path.substr(std::string("/api/compound/").size());
      auto i = b.index.find_id(id);
      if (!i) return fail(404, "not found", "unknown compound id '" + id + "'");
      return reply(200, record_json(b.index, *i, b.grammar));
    }

    Json req = parse_body(body);
    if (path == "/api/encode") {
      if (!req.is_object() || !req.contains("smiles") || !req["smiles"].is_string()) {
        throw RequestError("body must be {\"smiles\": text}");
      }
      std::string smiles = req["smiles"].get<std::string>();
      ValidityReport v = validate_smiles(smiles, b.grammar);
      if (!v.valid) return fail(400, "invalid smiles", join(v.reasons));
      return reply(200, {{"coords", to_json(b.encoder.encode(to_molgraph(smiles, b.grammar)))}});
    }
    if (path == "/api/decode") {
      if (!req.is_object() || !req.contains("coords")) throw RequestError("body must be {\"coords\": [real]}");
      Vector z = resolve_endpoint(b.index, Endpoint::at(coords_from_json(req["coords"], "coords")));
      return reply(200, to_json(describe_point(s->navigator->context(), z, TraversalRequest{}.label_k)));
    }
    // traverse
    TraversalRequest r = request_from_json(req);
    TraversalResult result;
    try {
      result = s->navigator->traverse(r);
    } catch (const NoPathError& e) {
      return fail(409, "disconnected endpoints", e.what());
    }
    Json out = {{"request", to_json(r)}};
    out.update(to_json(result, b.index));
    return reply(200, out);
  } catch (const RequestError& e) {
    return fail(400, "invalid request", e.what());
  } catch (const std::exception& e) {
    return fail(500, "internal error", e.what());
  }
}

void Service::mount(httplib::Server& server) const {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/api/.*", route);
  server.Post("/api/.*", route);
  server.Put("/api/.*", route);
  server.Delete("/api/.*", route);
}

bool serve(const ServiceConfig& config) {
  Service service;
  httplib::Server server;
  service.mount(server);
  int port = config.port;
  if (port == 0) {
    port = server.bind_to_any_port(config.host);
  } else if (!server.bind_to_port(config.host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "cannot listen on " << config.host << ':' << config.port << '\n';
    return false;
  }
  std::cerr << "listening on " << config.host << ':' << port << '\n';
  std::thread loader([&] {
    server.wait_until_ready();
    try {
      service.load(config);
      std::cerr << "index loaded from " << config.index_path.string() << '\n';
    } catch (const std::exception& e) {
      std::cerr << "failed to load index: " << e.what() << '\n';
      server.stop();
    }
  });
  bool ok = server.listen_after_bind();
  loader.join();
  return ok && service.ready();
}

}  // namespace mantra
