//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dualfuse/cli.hpp"
#include "dualfuse/dataset.hpp"

using namespace dualfuse;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dualfuse_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &name) const { return (path / name).string(); }
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path &p) { return json::parse(slurp(p)); }

void write_text(const fs::path &p, const std::string &s) { std::ofstream(p) << s; }

const char *kTinyConfig = R"({"steps": 4, "diffusion_steps": 8, "seed": 3,
  "model": {"node_dim": 8, "edge_dim": 6, "layers": 2, "hidden": 8, "knn": 4, "time_dim": 6, "rbf": 5}})";

}  // namespace

TEST_CASE("help, unknown subcommands and unknown flags") {
  auto h = run({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("check-symmetry") != std::string::npos);
  CHECK(run({}).code == 2);
  auto sub = run({"sample", "--help"});
  CHECK(sub.code == 0);
  CHECK(sub.out.find("--mode") != std::string::npos);

  auto bad = run({"trian"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("did you mean 'train'") != std::string::npos);

  auto flag = run({"eval", "--samples", "x", "--reprot", "y"});
  CHECK(flag.code == 2);
  CHECK(flag.err.find("did you mean '--report'") != std::string::npos);
}

TEST_CASE("suggest") {
  CHECK(cli::suggest("mock-dta", {"mock-data", "train"}) == "mock-data");
  CHECK_FALSE(cli::suggest("zzzzzzzzzz", {"eval", "train"}).has_value());
}

TEST_CASE("git blob hashes match git hash-object") {
  TempDir d;
  write_text(d / "hello.txt", "hello\n");
  write_text(d / "empty.txt", "");
  CHECK(cli::git_blob_hash(d / "hello.txt") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(cli::git_blob_hash(d / "empty.txt") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK_THROWS_AS(cli::git_blob_hash(d / "missing"), cli::IoError);
}

TEST_CASE("seed precedence: flag, then FUSE_SEED, then config") {
  ::unsetenv("FUSE_SEED");
  CHECK(cli::resolve_seed(std::nullopt, 5) == 5);
  ::setenv("FUSE_SEED", "11", 1);
  CHECK(cli::resolve_seed(std::nullopt, 5) == 11);
  CHECK(cli::resolve_seed(7, 5) == 7);
  ::setenv("FUSE_SEED", "eleven", 1);
  CHECK_THROWS(cli::resolve_seed(std::nullopt, 5));
  ::unsetenv("FUSE_SEED");
}

TEST_CASE("mock-data is deterministic and derive-dataset finds the planted pairs") {
  TempDir d;
  const std::vector<std::string> base{"mock-data", "--ligands", "5", "--targets", "3", "--seed", "7"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", d / "a.jsonl"});
  b.insert(b.end(), {"--out", d / "b.jsonl"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(d / "a.jsonl") == slurp(d / "b.jsonl"));

  auto m = read_json(d / "a.jsonl.manifest.json");
  CHECK(m.at("status") == "ok");
  CHECK(m.at("seed") == 7);
  CHECK(m.at("command") == "mock-data");
  CHECK(!m.at("started_at").is_null());
  CHECK(!m.at("finished_at").is_null());
  CHECK(m.at("artifacts").at(0).at("git_blob") == cli::git_blob_hash(d / "a.jsonl"));

  auto r = run({"derive-dataset", "--records", d / "a.jsonl", "--out", d / "inst.jsonl"});
  REQUIRE(r.code == 0);
  CHECK(data::read_instances(d / "inst.jsonl").size() == 15);
  CHECK(read_json(d / "inst.jsonl.report.json").at("tuples") == 15);
  auto dm = read_json(d / "inst.jsonl.manifest.json");
  CHECK(dm.at("inputs").at(0).at("git_blob") == cli::git_blob_hash(d / "a.jsonl"));
}

TEST_CASE("I/O failures exit 1 with a structured message and a finalized manifest") {
  TempDir d;
  auto r = run({"derive-dataset", "--records", d / "missing.jsonl", "--out", d / "o.jsonl"});
  CHECK(r.code == 1);
  auto err = json::parse(r.err);
  CHECK(err.at("status") == "error");
  CHECK(err.at("kind") == "io");
  auto m = read_json(d / "o.jsonl.manifest.json");
  CHECK(m.at("status") == "failed");
  CHECK(m.at("inputs").at(0).at("git_blob").is_null());

  write_text(d / "cfg.json", R"({"steps": 1, "learning_rte": 0.1})");
  auto t = run({"train", "--data", d / "none.jsonl", "--config", d / "cfg.json", "--out", d / "ck.bin"});
  CHECK(t.code == 1);
  CHECK(t.err.find("learning_rte") != std::string::npos);
}

TEST_CASE("train, sample, eval and check-symmetry pipeline is reproducible") {
  TempDir d;
  ::unsetenv("FUSE_SEED");
  REQUIRE(run({"mock-data", "--ligands", "2", "--targets", "2", "--seed", "1", "--min-atoms", "4", "--max-atoms",
               "5", "--pocket-min", "12", "--pocket-max", "14", "--out", d / "rec.jsonl"})
              .code == 0);
  REQUIRE(run({"derive-dataset", "--records", d / "rec.jsonl", "--out", d / "inst.jsonl"}).code == 0);
  write_text(d / "cfg.json", kTinyConfig);

  auto train = [&](const std::string &name) {
    return run({"train", "--data", d / "inst.jsonl", "--config", d / "cfg.json", "--out", d / name, "--log-every",
                "0"});
  };
  REQUIRE(train("ck1.bin").code == 0);
  REQUIRE(train("ck2.bin").code == 0);
  CHECK(slurp(d / "ck1.bin.loss.csv") == slurp(d / "ck2.bin.loss.csv"));
  CHECK(slurp(d / "ck1.bin") == slurp(d / "ck2.bin"));

  // Re-running from the manifest's argv reproduces the artifact.
  auto man = read_json(d / "ck1.bin.manifest.json");
  CHECK(man.at("config").at("steps") == 4);
  auto argv = man.at("argv").get<std::vector<std::string>>();
  const auto before = cli::git_blob_hash(d / "ck1.bin");
  REQUIRE(run({argv.begin() + 1, argv.end()}).code == 0);
  CHECK(cli::git_blob_hash(d / "ck1.bin") == before);

  {
    std::ifstream in(d / "inst.jsonl");
    std::string line;
    std::getline(in, line);
    write_text(d / "pockets.jsonl", line + "\n");
  }
  auto sample = [&](const std::string &dir) {
    return run({"sample", "--ckpt", d / "ck1.bin", "--pockets", d / "pockets.jsonl", "--count", "3", "--out",
                d / dir, "--seed", "5"});
  };
  REQUIRE(sample("s1").code == 0);
  REQUIRE(sample("s2").code == 0);
  CHECK(slurp(d.path / "s1" / "samples.jsonl") == slurp(d.path / "s2" / "samples.jsonl"));
  CHECK(slurp(d.path / "s1" / "samples.sdf") == slurp(d.path / "s2" / "samples.sdf"));
  CHECK(read_json(d.path / "s1" / "samples.manifest.json").at("status") == "ok");

  auto wrong = run({"sample", "--ckpt", d / "ck1.bin", "--pockets", d / "pockets.jsonl", "--mode", "sequential",
                    "--out", d / "s3"});
  CHECK(wrong.code == 1);
  CHECK(json::parse(wrong.err).at("kind") == "sample");

  auto ev = run({"eval", "--samples", (d.path / "s1" / "samples.jsonl").string(), "--report", d / "report.json"});
  REQUIRE(ev.code == 0);
  auto rep = read_json(d / "report.json");
  CHECK(rep.at("n_samples") == 3);
  CHECK(rep.at("per_sample").size() == 3);
  CHECK(rep.at("qed").is_null());

  auto sym = run({"check-symmetry", "--ckpt", d / "ck1.bin", "--trials", "2", "--samples",
                  (d.path / "s1" / "samples.jsonl").string(), "--report", d / "sym.json"});
  REQUIRE(sym.code == 0);
  auto sj = read_json(d / "sym.json");
  CHECK(sj.at("pass").at("r1") == true);
  CHECK(sj.at("pass").at("r2") == true);
  CHECK(sj.at("r4_samples") == 3);
}
