//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualfuse/numerics/archive.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace dualfuse::num {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'F', 'U', 'S', 'E', 'C', 'K', 'P'};

template <class U>
void put_le(std::ostream &os, U v) {
  std::array<char, sizeof(U)> buf;
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf.data(), buf.size());
}

template <class U>
U get_le(std::istream &is) {
  std::array<unsigned char, sizeof(U)> buf;
  is.read(reinterpret_cast<char *>(buf.data()), buf.size());
  if (!is) throw NumericsError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

std::string get_bytes(std::istream &is, std::uint64_t n) {
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw NumericsError("checkpoint truncated");
  return s;
}

}  // namespace

const Tensor &TensorArchive::get(const std::string &name) const {
  for (const auto &[n, t] : tensors)
    if (n == name) return t;
  throw NumericsError("checkpoint has no tensor named " + name);
}

void write_archive(const std::filesystem::path &path, const TensorArchive &archive) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw NumericsError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, TensorArchive::kFormatVersion);
  put_le<std::uint64_t>(os, archive.header_json.size());
  os.write(archive.header_json.data(), static_cast<std::streamsize>(archive.header_json.size()));
  put_le<std::uint64_t>(os, archive.tensors.size());
  for (const auto &[name, t] : archive.tensors) {
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) put_le<std::uint64_t>(os, e);
    for (double x : t.data()) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(x));
  }
  if (!os) throw NumericsError("write failed for " + path.string());
}

TensorArchive read_archive(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw NumericsError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw NumericsError(path.string() + " is not a checkpoint file");
  const auto version = get_le<std::uint32_t>(is);
  if (version != TensorArchive::kFormatVersion) {
    throw NumericsError("unsupported checkpoint format version " + std::to_string(version));
  }
  TensorArchive archive;
  archive.header_json = get_bytes(is, get_le<std::uint64_t>(is));
  const auto count = get_le<std::uint64_t>(is);
  for (std::uint64_t k = 0; k < count; ++k) {
    std::string name = get_bytes(is, get_le<std::uint32_t>(is));
    const auto rank = get_le<std::uint32_t>(is);
    std::vector<std::size_t> shape(rank);
    for (auto &e : shape) e = static_cast<std::size_t>(get_le<std::uint64_t>(is));
    std::vector<double> data(numel(shape));
    for (auto &x : data) x = std::bit_cast<double>(get_le<std::uint64_t>(is));
    archive.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return archive;
}

}  // namespace dualfuse::num
