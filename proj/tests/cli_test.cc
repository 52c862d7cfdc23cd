#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI through the shell, capturing stdout and stderr together.
Run run(const std::string& args) {
  std::string cmd = std::string("'") + MANTRA_CLI + "' " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const fs::path& workdir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mantra_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Built once from the bundled corpus.
const fs::path& index_path() {
  static fs::path idx = [] {
    fs::path p = workdir() / "idx";
    Run r = run("build-index --data " + q(MANTRA_DATA_DIR "/corpus.csv") + " --out " + q(p) + " --seed 7");
    REQUIRE(r.code == 0);
    return p;
  }();
  return idx;
}

struct Cleanup {
  ~Cleanup() { fs::remove_all(workdir()); }
} cleanup;

}  // namespace

TEST_CASE("parse and derive round trip") {
  Run p = run("parse CC");
  CHECK(p.code == 0);
  std::string ids = p.out.substr(0, p.out.find('\n'));
  CHECK_FALSE(ids.empty());
  CHECK(p.out.find("valid") != std::string::npos);
  Run d = run("derive " + ids);
  CHECK(d.code == 0);
  CHECK(d.out == "CC\n");
  std::string commas = ids;
  for (char& c : commas)
    if (c == ' ') c = ',';
  CHECK(run("derive " + commas).out == "CC\n");
  CHECK(run("derive 0").code == 1);   // incomplete
  CHECK(run("derive 9999").code == 1);
  CHECK(run("derive x").code == 2);
  CHECK(run("parse '((('").code == 1);
  Run ring = run("parse c1ccccc1C2CCCC");
  CHECK(ring.code == 1);
  CHECK(ring.out.find("unpaired ring digit 2") != std::string::npos);
}

TEST_CASE("validate reports the bad row") {
  fs::path f = workdir() / "bad.csv";
  std::ofstream(f) << "id,smiles,label,activity\na,CC,,\nb,xyz!!,,\nc,CCO,,\n";
  Run r = run("validate " + q(f));
  CHECK(r.code == 1);
  CHECK(r.out.find("line 3 (b)") != std::string::npos);
  CHECK(r.out.find("2 valid, 1 rejected") != std::string::npos);
  CHECK(run("validate " + q(MANTRA_DATA_DIR "/corpus.csv")).code == 0);
  CHECK(run("validate /nonexistent.csv").code == 3);

  CHECK(run("build-index --data " + q(f) + " --out " + q(workdir() / "bad_idx")).code == 1);
  CHECK_FALSE(fs::exists(workdir() / "bad_idx"));
  CHECK(run("build-index --skip-invalid --data " + q(f) + " --out " + q(workdir() / "bad_idx")).code == 0);
  CHECK(fs::exists(workdir() / "bad_idx.decw"));
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);
  CHECK(run("traverse --help").code == 0);
  CHECK(run("build-index --data x.csv").code == 2);
  std::string base = "traverse --index " + q(index_path()) + " --source-label DIABETES --dest-label 'LUNG CANCER'";
  CHECK(run(base + " --m 1").code == 2);
  CHECK(run(base + " --k 0").code == 2);
  CHECK(run(base + " --mode astar").code == 2);
  CHECK(run(base + " --w-fp -1").code == 2);
  CHECK(run(base + " --source-id MOL0001").code == 2);  // two source flags
  CHECK(run("traverse --index " + q(index_path()) + " --source-label NOPE --dest-label DIABETES").code == 2);
  CHECK(run("traverse --index " + q(index_path()) + " --source-coords 1,2 --dest-label DIABETES").code == 2);
}

TEST_CASE("io and disconnection exit codes") {
  CHECK(run("traverse --index " + q(workdir() / "missing") + " --source-label A --dest-label B").code == 3);
  Run r = run("traverse --index " + q(index_path()) + " --source-id MOL0001 --dest-id MOL0300 --n 1");
  CHECK(r.code == 4);
  CHECK(r.out.find("disconnected") != std::string::npos);
  fs::path broken = workdir() / "broken";
  for (const char* s : {"", ".frag", ".decw", ".enc"}) {
    fs::copy_file(index_path().string() + s, broken.string() + s, fs::copy_options::overwrite_existing);
  }
  std::ofstream(broken.string() + ".decw", std::ios::trunc) << "DECW0002";
  CHECK(run("traverse --index " + q(broken) + " --source-label DIABETES --dest-label 'LUNG CANCER'").code == 3);
}

TEST_CASE("build then traverse gives four paths") {
  fs::path out = workdir() / "result.json";
  Run r = run("traverse --index " + q(index_path()) +
              " --source-label DIABETES --dest-label 'LUNG CANCER' --m 100 --k 4 --w-fp 1.0 --w-sa 0 --w-dl 0"
              " --w-act 0 --mode yen --out " + q(out));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("compound") != std::string::npos);
  CHECK(r.out.find("4 paths, 400 decodes") != std::string::npos);
  auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["paths"].size() == 4);
  CHECK(j["compounds"].size() == 400);
  for (const auto& p : j["paths"]) CHECK(p["points"].size() == 100);
  CHECK(j["request"]["K"] == 4);

  Run json = run("traverse --index " + q(index_path()) + " --source-id MOL0001 --dest-id MOL0002 --m 5 --k 1");
  REQUIRE(json.code == 0);
  CHECK(nlohmann::json::parse(json.out)["compounds"].size() == 5);
}

TEST_CASE("same seed gives byte-identical JSON") {
  std::string base = "traverse --index " + q(index_path()) +
                     " --source-label DIABETES --dest-label 'LUNG CANCER' --mode perturb --k 4 --m 50 --out ";
  fs::path a = workdir() / "a.json", b = workdir() / "b.json", c = workdir() / "c.json";
  REQUIRE(run(base + q(a) + " --seed 5").code == 0);
  REQUIRE(run(base + q(b) + " --seed 5").code == 0);
  REQUIRE(run(base + q(c) + " --seed 6").code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));

  // rebuilding the index from the same seed reproduces every artifact
  fs::path again = workdir() / "idx_again";
  REQUIRE(run("build-index --data " + q(MANTRA_DATA_DIR "/corpus.csv") + " --out " + q(again) + " --seed 7").code == 0);
  for (const char* s : {"", ".frag", ".decw", ".enc"}) {
    CHECK(slurp(index_path().string() + s) == slurp(again.string() + s));
  }
}

TEST_CASE("encode") {
  Run a = run("encode CCO --index " + q(index_path()));
  REQUIRE(a.code == 0);
  CHECK(nlohmann::json::parse(a.out)["coords"].size() == 56);
  CHECK(run("encode CCO --index " + q(index_path())).out == a.out);
  CHECK(run("encode '(((' --index " + q(index_path())).code == 1);
}
