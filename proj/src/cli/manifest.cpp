//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "dualfuse/cli.hpp"

namespace dualfuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string git_blob_hash(const fs::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string head = "blob " + std::to_string(body.size()) + '\0';

  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX *ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) &&
                  EVP_DigestUpdate(ctx, body.data(), body.size()) && EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-1 failed for " + file.string());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t configured) {
  if (flag) return *flag;
  if (const char *env = std::getenv("FUSE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception &) {
    }
    throw std::runtime_error(std::string("FUSE_SEED is not an unsigned integer: '") + env + "'");
  }
  return configured;
}

std::optional<std::string> suggest(const std::string &word, const std::vector<std::string> &candidates) {
  auto distance = [](const std::string &a, const std::string &b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= b.size(); ++j)
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
      std::swap(prev, cur);
    }
    return prev[b.size()];
  };
  std::optional<std::string> best;
  std::size_t best_d = 0;
  for (const auto &c : candidates) {
    const auto d = distance(word, c);
    if (!best || d < best_d) {
      best = c;
      best_d = d;
    }
  }
  if (best && best_d <= std::max<std::size_t>(2, word.size() / 3)) return best;
  return std::nullopt;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(fs::path path, std::string command, std::vector<std::string> argv)
    : path_(std::move(path)) {
  doc_ = {{"format", "dualfuse-run-manifest"},
          {"command", std::move(command)},
          {"argv", std::move(argv)},
          {"config", json::object()},
          {"seed", nullptr},
          {"inputs", json::array()},
          {"artifacts", json::array()},
          {"results", json::object()},
          {"started_at", nullptr},
          {"finished_at", nullptr},
          {"status", "pending"}};
}

void RunManifest::add_input(const fs::path &file) {
  // A missing input is recorded; the run itself reports the failure.
  json row{{"path", file.string()}};
  row["git_blob"] = fs::is_regular_file(file) ? json(git_blob_hash(file)) : json(nullptr);
  doc_["inputs"].push_back(row);
}

void RunManifest::add_artifact(const fs::path &file) { artifacts_.push_back(file); }

void RunManifest::begin() {
  doc_["started_at"] = utc_timestamp();
  doc_["status"] = "running";
  write();
}

void RunManifest::finish(bool ok, const std::string &error) {
  doc_["finished_at"] = utc_timestamp();
  doc_["status"] = ok ? "ok" : "failed";
  if (!error.empty()) doc_["error"] = error;
  json arts = json::array();
  for (const auto &a : artifacts_) {
    json row{{"path", a.string()}};
    row["git_blob"] = fs::is_regular_file(a) ? json(git_blob_hash(a)) : json(nullptr);
    arts.push_back(row);
  }
  doc_["artifacts"] = arts;
  write();
}

void RunManifest::write() const {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream os(path_);
  if (!os) throw IoError("cannot write manifest " + path_.string());
  os << doc_.dump(2) << '\n';
  if (!os) throw IoError("failed writing manifest " + path_.string());
}

}  // namespace dualfuse::cli
