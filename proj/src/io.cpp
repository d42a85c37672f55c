// Copyright 2026 The eyepad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eyepad/io.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "eyepad/error.hpp"

namespace eyepad::io {
namespace {

template <typename Word, typename Real>
void write_le(const std::filesystem::path& path, std::span<const Real> values) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  std::vector<unsigned char> bytes(values.size() * sizeof(Word));
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto word = std::bit_cast<Word>(values[i]);
    for (std::size_t b = 0; b < sizeof(Word); ++b)
      bytes[i * sizeof(Word) + b] = static_cast<unsigned char>((word >> (8 * b)) & 0xFFu);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

template <typename Word, typename Real>
std::vector<Real> read_le(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % sizeof(Word) != 0) {
    throw IoError("'" + path.string() + "' has a truncated value at the end");
  }
  std::vector<Real> values(bytes.size() / sizeof(Word));
  for (std::size_t i = 0; i < values.size(); ++i) {
    Word word = 0;
    for (std::size_t b = 0; b < sizeof(Word); ++b)
      word |= static_cast<Word>(bytes[i * sizeof(Word) + b]) << (8 * b);
    values[i] = std::bit_cast<Real>(word);
  }
  return values;
}

}  // namespace

void write_f64_le(const std::filesystem::path& path, std::span<const double> values) {
  write_le<std::uint64_t, double>(path, values);
}

std::vector<double> read_f64_le(const std::filesystem::path& path) {
  return read_le<std::uint64_t, double>(path);
}

void write_f32_le(const std::filesystem::path& path, std::span<const float> values) {
  write_le<std::uint32_t, float>(path, values);
}

std::vector<float> read_f32_le(const std::filesystem::path& path) {
  return read_le<std::uint32_t, float>(path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed ^ (h + 0x9e3779b97f4a7c15ULL * (index + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace eyepad::io
