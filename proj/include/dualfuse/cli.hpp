//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dualfuse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O and runtime errors
inline constexpr int kExitUsage = 2;    // unknown subcommand or flag

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one subcommand. `args` excludes the program name.
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Git blob id: SHA-1 over "blob <size>\0" followed by the file bytes.
std::string git_blob_hash(const std::filesystem::path &file);

/// Flag beats FUSE_SEED, which beats the configured value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t configured);

/// Closest candidate by edit distance, if it is close enough to be a typo.
std::optional<std::string> suggest(const std::string &word, const std::vector<std::string> &candidates);

/// Provenance record written before a run starts and rewritten when it ends.
class RunManifest {
 public:
  RunManifest(std::filesystem::path path, std::string command, std::vector<std::string> argv);

  void set_config(nlohmann::json config) { doc_["config"] = std::move(config); }
  void set_seed(std::uint64_t seed) { doc_["seed"] = seed; }
  void add_input(const std::filesystem::path &file);
  void add_artifact(const std::filesystem::path &file);
  void set_result(const std::string &key, nlohmann::json value) { doc_["results"][key] = std::move(value); }

  /// Writes the manifest with status "running".
  void begin();
  /// Writes the final manifest with end time, status and artifact hashes.
  void finish(bool ok, const std::string &error = {});

  const nlohmann::json &document() const { return doc_; }
  const std::filesystem::path &path() const { return path_; }

 private:
  void write() const;

  std::filesystem::path path_;
  nlohmann::json doc_;
  std::vector<std::filesystem::path> artifacts_;
};

/// UTC time as 2026-01-31T12:34:56Z.
std::string utc_timestamp();

}  // namespace dualfuse::cli
