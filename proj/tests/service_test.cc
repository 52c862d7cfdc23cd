#include <cmath>
#include <cstdlib>
#include <future>
#include <random>
#include <thread>

#include "doctest.h"
#include "mantra/dataset_io.h"
#include "mantra/json_api.h"
#include "mantra/service.h"

#include "httplib.h"

using namespace mantra;

namespace {

std::unique_ptr<Bundle> small_bundle(std::size_t count = 150) {
  static DatasetLoad d = load_dataset(MANTRA_DATA_DIR "/corpus.csv", default_grammar());
  std::vector<CompoundRecord> records(d.records.begin(), d.records.begin() + static_cast<long>(count));
  return build_bundle(records, default_grammar());
}

Service& shared_service() {
  static Service* s = [] {
    auto* out = new Service;
    out->attach(small_bundle());
    return out;
  }();
  return *s;
}

struct Reply {
  int status;
  Json body;
};

Reply call(const Service& s, const std::string& method, const std::string& path, const std::string& body = "") {
  ApiResponse r = s.handle(method, path, body);
  return {r.status, Json::parse(r.body)};
}

Reply post(const std::string& path, const Json& body) {
  return call(shared_service(), "POST", path, body.dump());
}

Json traverse_body(std::size_t m = 12, std::size_t k = 3) {
  return {{"source", {{"label", "DIABETES"}}},
          {"destination", {{"label", "LUNG CANCER"}}},
          {"m", m},
          {"K", k},
          {"mode", "perturb"},
          {"seed", 3}};
}

void check_numbers(const Json& j) {
  if (j.is_number_float()) {
    double x = j.get<double>();
    CHECK(round_sig(x) == x);
  } else if (j.is_structured()) {
    for (const auto& v : j) check_numbers(v);
  }
}

// Cyclic Jacobi rotations; returns eigenvalues descending with unit eigenvectors as columns.
std::pair<std::vector<double>, Matrix> jacobi_eigen(Matrix a) {
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  std::vector<double> values;
  Matrix vecs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values.push_back(a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]));
    vecs.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {values, vecs};
}

}  // namespace

TEST_CASE("pca matches a Jacobi eigensolver") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 3 + trial % 5, n = 40 + trial;
    Matrix pts(d, n);
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < d; ++r) pts(r, c) = (1.0 + 2.0 * static_cast<double>(r)) * g(rng) + 0.5 * r;
    Projection p = pca_2d(pts);
    Vector mean = Vector::Zero(d);
    for (Eigen::Index c = 0; c < n; ++c) mean += pts.col(c);
    mean /= static_cast<double>(n);
    Matrix cov = Matrix::Zero(d, d);
    for (Eigen::Index c = 0; c < n; ++c) cov += (pts.col(c) - mean) * (pts.col(c) - mean).transpose();
    cov /= static_cast<double>(n);
    auto [values, vecs] = jacobi_eigen(cov);
    for (int k = 0; k < 2; ++k) {
      Vector v = vecs.col(k);
      Eigen::Index arg = 0;
      for (Eigen::Index i = 1; i < d; ++i)
        if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
      if (v(arg) < 0) v = -v;
      CHECK(std::abs(p.variance[k] - values[static_cast<std::size_t>(k)]) < 1e-8);
      CHECK((p.components.col(k) - v).norm() < 1e-8);
      for (Eigen::Index c = 0; c < n; ++c) CHECK(std::abs(p.xy(k, c) - v.dot(pts.col(c) - mean)) < 1e-8);
    }
    CHECK(p.variance[0] >= p.variance[1]);
  }
}

TEST_CASE("pca edge cases") {
  Matrix one(4, 1);
  one << 1, 2, 3, 4;
  Projection p = pca_2d(one);
  CHECK(p.xy(0, 0) == 0.0);
  CHECK(p.xy(1, 0) == 0.0);
  Matrix line(1, 3);
  line << -1, 0, 1;
  p = pca_2d(line);
  CHECK(p.xy(0, 0) == doctest::Approx(-1));
  CHECK(p.xy(1, 2) == 0.0);
  CHECK(pca_2d(Matrix(3, 0)).xy.cols() == 0);
}

TEST_CASE("not ready until attached") {
  Service s;
  CHECK_FALSE(s.ready());
  for (const char* path : {"/api/health", "/api/labels", "/api/projection", "/api/compound/MOL0001"}) {
    Reply r = call(s, "GET", path);
    CHECK(r.status == 503);
    CHECK(r.body["error"].is_string());
    CHECK(r.body["detail"].is_string());
  }
  CHECK(call(s, "POST", "/api/traverse", "{}").status == 503);
  s.attach(small_bundle(30));
  CHECK(s.ready());
  Reply h = call(s, "GET", "/api/health");
  CHECK(h.status == 200);
  CHECK(h.body["status"] == "ok");
  CHECK(h.body["records"] == 30);
}

TEST_CASE("routing errors") {
  CHECK(call(shared_service(), "GET", "/api/nothing").status == 404);
  CHECK(call(shared_service(), "GET", "/api/traverse").status == 405);
  CHECK(call(shared_service(), "POST", "/api/labels", "{}").status == 405);
  Reply bad = call(shared_service(), "POST", "/api/traverse", "{not json");
  CHECK(bad.status == 400);
  CHECK(bad.body["detail"].get<std::string>().find("JSON") != std::string::npos);
}

TEST_CASE("encode") {
  Reply a = post("/api/encode", {{"smiles", "CC"}});
  REQUIRE(a.status == 200);
  CHECK(a.body["coords"].size() == kDefaultLatentDim);
  CHECK(post("/api/encode", {{"smiles", "CC"}}).body == a.body);
  CHECK(post("/api/encode", {{"smiles", "CCO"}}).body != a.body);
  Reply bad = post("/api/encode", {{"smiles", "((("}});
  CHECK(bad.status == 400);
  CHECK_FALSE(bad.body["detail"].get<std::string>().empty());
  CHECK(post("/api/encode", {{"smiles", "c1ccccc1C2CCCC"}}).body["detail"].get<std::string>().find(
            "unpaired ring digit 2") != std::string::npos);
  CHECK(post("/api/encode", {{"text", "CC"}}).status == 400);
  CHECK(post("/api/encode", {{"smiles", 3}}).status == 400);
  check_numbers(a.body);
}

TEST_CASE("decode") {
  Json coords = post("/api/encode", {{"smiles", "CCO"}}).body["coords"];
  Reply r = post("/api/decode", {{"coords", coords}});
  REQUIRE(r.status == 200);
  CHECK(r.body["smiles"].is_string());
  CHECK(r.body.contains("potential_label"));
  CHECK(post("/api/decode", {{"coords", {1, 2}}}).status == 400);
  CHECK(post("/api/decode", {{"coords", "x"}}).status == 400);
}

TEST_CASE("traverse between label centroids") {
  Reply r = post("/api/traverse", traverse_body(12, 3));
  REQUIRE(r.status == 200);
  const Json& b = r.body;
  CHECK(b["paths"].size() == 3);
  CHECK(b["compounds"].size() == 36);
  for (const auto& p : b["paths"]) {
    CHECK(p["points"].size() == 12);
    CHECK(p["nodes"].front().is_null());
    CHECK(p["nodes"].back().is_null());
    for (std::size_t i = 1; i + 1 < p["nodes"].size(); ++i) CHECK(p["nodes"][i].is_string());
    CHECK(p["cost"].get<double>() >= 0.0);
  }
  for (std::size_t i = 0; i < b["compounds"].size(); ++i) {
    const Json& c = b["compounds"][i];
    CHECK(c["path"] == i / 12);
    CHECK(c["step"] == i % 12);
    for (const char* key : {"smiles", "complete", "valid", "novel", "properties", "potential_label"}) {
      CHECK(c.contains(key));
    }
  }
  CHECK(b["stats"]["total"] == 36);
  CHECK(b["request"]["mode"] == "perturb");
  CHECK(b["source"].size() == kDefaultLatentDim);
  check_numbers(b);
  // byte-identical on repeat
  CHECK(shared_service().handle("POST", "/api/traverse", traverse_body(12, 3).dump()).body ==
        shared_service().handle("POST", "/api/traverse", traverse_body(12, 3).dump()).body);
}

TEST_CASE("traverse validation") {
  auto with = [](const char* key, Json value) {
    Json b = traverse_body();
    b[key] = std::move(value);
    return post("/api/traverse", b);
  };
  CHECK(with("m", 1).status == 400);
  CHECK(with("m", -5).status == 400);
  CHECK(with("m", 2.5).status == 400);
  CHECK(with("K", 0).status == 400);
  CHECK(with("n", 150).status == 400);
  CHECK(with("sigma", -1).status == 400);
  CHECK(with("mode", "astar").status == 400);
  CHECK(with("weights", {{"fingerprint", -1}}).status == 400);
  CHECK(with("weights", {{"tanimoto", 1}}).status == 400);
  CHECK(with("bogus", 1).status == 400);
  CHECK(with("source", {{"label", "X"}, {"id", "Y"}}).status == 400);
  CHECK(with("source", {{"coords", {1.0, 2.0}}}).status == 400);
  Reply unknown = with("source", {{"label", "MALARIA"}});
  CHECK(unknown.status == 400);
  CHECK(unknown.body["detail"].get<std::string>().find("unknown label") != std::string::npos);
  CHECK(with("source", {{"id", "MOL0002"}}).status == 200);
  Json no_dest = traverse_body();
  no_dest.erase("destination");
  CHECK(post("/api/traverse", no_dest).status == 400);
}

TEST_CASE("disconnected endpoints give 409") {
  // with one neighbour per record the graph splits into many small pieces
  Json b = traverse_body();
  b["n"] = 1;
  b["mode"] = "yen";
  b["source"] = {{"id", "MOL0001"}};
  bool found = false;
  for (int i = 2; i <= 150 && !found; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "MOL%04d", i);
    b["destination"] = {{"id", id}};
    Reply r = post("/api/traverse", b);
    if (r.status == 409) {
      found = true;
      CHECK(r.body["error"] == "disconnected endpoints");
    } else {
      CHECK(r.status == 200);
    }
  }
  CHECK(found);
}

TEST_CASE("concurrent traversals match serial ones") {
  std::vector<std::string> bodies;
  for (int seed = 0; seed < 4; ++seed) {
    Json b = traverse_body(10, 2);
    b["seed"] = seed;
    bodies.push_back(b.dump());
  }
  std::vector<std::string> serial;
  for (const auto& b : bodies) serial.push_back(shared_service().handle("POST", "/api/traverse", b).body);
  std::vector<std::future<std::string>> parallel;
  for (const auto& b : bodies) {
    parallel.push_back(std::async(std::launch::async, [&b] {
      return shared_service().handle("POST", "/api/traverse", b).body;
    }));
  }
  for (std::size_t i = 0; i < bodies.size(); ++i) CHECK(parallel[i].get() == serial[i]);
}

TEST_CASE("browse endpoints") {
  Reply proj = call(shared_service(), "GET", "/api/projection");
  REQUIRE(proj.status == 200);
  REQUIRE(proj.body["points"].size() == 150);
  double vx = 0, vy = 0, mx = 0, my = 0;
  for (const auto& p : proj.body["points"]) {
    mx += p["x"].get<double>();
    my += p["y"].get<double>();
  }
  mx /= 150;
  my /= 150;
  for (const auto& p : proj.body["points"]) {
    vx += std::pow(p["x"].get<double>() - mx, 2);
    vy += std::pow(p["y"].get<double>() - my, 2);
  }
  CHECK(std::abs(mx) < 1e-6);
  CHECK(vx >= vy);
  CHECK(proj.body["points"][0]["id"] == "MOL0001");
  check_numbers(proj.body);

  Reply rec = call(shared_service(), "GET", "/api/compound/MOL0001");
  REQUIRE(rec.status == 200);
  for (const char* key : {"mw", "sa", "drug_likeness"}) CHECK(rec.body["properties"][key].is_number());
  CHECK(rec.body.contains("activity_class"));
  CHECK(rec.body["coords"].size() == kDefaultLatentDim);
  CHECK(call(shared_service(), "GET", "/api/compound/NOPE").status == 404);

  Reply labels = call(shared_service(), "GET", "/api/labels");
  REQUIRE(labels.status == 200);
  std::size_t total = labels.body["unlabeled"].get<std::size_t>();
  for (const auto& l : labels.body["labels"]) total += l["count"].get<std::size_t>();
  CHECK(total == 150);
  CHECK(labels.body["labels"][0]["label"] == "DIABETES");
}

TEST_CASE("over http") {
  httplib::Server server;
  shared_service().mount(server);
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto h = client.Get("/api/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(h->get_header_value("Content-Type") == "application/json");
  auto e = client.Post("/api/encode", R"({"smiles":"((("})", "application/json");
  REQUIRE(e);
  CHECK(e->status == 400);
  server.stop();
  t.join();
}

TEST_CASE("config from environment") {
  ::setenv("PORT", "9123", 1);
  ::setenv("INDEX_PATH", "/tmp/idx", 1);
  ::unsetenv("GRAMMAR_PATH");
  ::setenv("WEIGHTS_PATH", "/tmp/w.decw", 1);
  ServiceConfig c = ServiceConfig::from_env();
  CHECK(c.port == 9123);
  CHECK(c.index_path == "/tmp/idx");
  CHECK_FALSE(c.grammar_path.has_value());
  CHECK(*c.weights_path == "/tmp/w.decw");
  ::setenv("PORT", "http", 1);
  CHECK_THROWS(ServiceConfig::from_env());
  ::unsetenv("PORT");
  ::unsetenv("INDEX_PATH");
  ::unsetenv("WEIGHTS_PATH");
  CHECK(ServiceConfig::from_env().port == 8080);
}
