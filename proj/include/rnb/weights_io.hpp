// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// RNBW weights container.
//
//   "RNBW" | u16 version (=1) | u32 entry count
//   per entry:
//     u16 name length | UTF-8 name | u8 dtype | u8 rank | u32 dims[rank] | payload
//   dtype 0: numel x f32
//   dtype 1: f32 scale, then numel x i8 codes
//
// All integers and floats are little-endian.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rnb/error.hpp"
#include "rnb/numerics.hpp"

namespace rnb {

using WeightEntry = std::variant<Tensor, QuantTensor>;

/// Named tensors in insertion order; names are unique.
class WeightStore {
 public:
  void set(const std::string& name, WeightEntry entry) {
    auto it = index_.find(name);
    if (it != index_.end()) {
      entries_[it->second].second = std::move(entry);
      return;
    }
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(entry));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const WeightEntry& entry(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw Error(ErrorCode::mapping, "missing weight entry '" + name + "'");
    }
    return entries_[it->second].second;
  }

  /// Float view of an entry; quantized entries are dequantized.
  Tensor tensor(const std::string& name) const {
    const WeightEntry& e = entry(name);
    if (const auto* t = std::get_if<Tensor>(&e)) return *t;
    return dequantize(std::get<QuantTensor>(e));
  }

  const std::vector<std::pair<std::string, WeightEntry>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<std::string, WeightEntry>> entries_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw Error(ErrorCode::io, "truncated weights container");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace detail

inline constexpr std::uint16_t kWeightsVersion = 1;

inline void write_weights(std::ostream& os, const WeightStore& store) {
  os.write("RNBW", 4);
  detail::put_le<std::uint16_t>(os, kWeightsVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, entry] : store.entries()) {
    if (name.size() > 0xFFFF) throw Error(ErrorCode::io, "weight name too long: " + name);
    detail::put_le<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    const Shape& shape = std::visit([](const auto& t) -> const Shape& {
      if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Tensor>) return t.shape();
      else return t.shape;
    }, entry);
    const auto dtype = static_cast<std::uint8_t>(entry.index());
    detail::put_le<std::uint8_t>(os, dtype);
    detail::put_le<std::uint8_t>(os, static_cast<std::uint8_t>(shape.size()));
    for (std::size_t d : shape) detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    if (const auto* t = std::get_if<Tensor>(&entry)) {
      for (double v : t->values()) detail::put_le<float>(os, static_cast<float>(v));
    } else {
      const auto& q = std::get<QuantTensor>(entry);
      detail::put_le<float>(os, static_cast<float>(q.scale));
      for (std::int8_t c : q.codes) detail::put_le<std::int8_t>(os, c);
    }
  }
  if (!os) throw Error(ErrorCode::io, "failed writing weights container");
}

inline WeightStore read_weights(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "RNBW", 4) != 0) {
    throw Error(ErrorCode::io, "not an RNBW weights container");
  }
  const auto version = detail::get_le<std::uint16_t>(is);
  if (version != kWeightsVersion) {
    throw Error(ErrorCode::version,
                "unsupported RNBW version " + std::to_string(version));
  }
  const auto count = detail::get_le<std::uint32_t>(is);
  WeightStore store;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = detail::get_le<std::uint16_t>(is);
    std::string name(name_len, '\0');
    if (name_len && !is.read(name.data(), name_len)) {
      throw Error(ErrorCode::io, "truncated weights container");
    }
    const auto dtype = detail::get_le<std::uint8_t>(is);
    const auto rank = detail::get_le<std::uint8_t>(is);
    Shape shape(rank);
    for (auto& d : shape) d = detail::get_le<std::uint32_t>(is);
    const std::size_t n = numel(shape);
    if (dtype == 0) {
      std::vector<double> values(n);
      for (auto& v : values) v = detail::get_le<float>(is);
      store.set(name, Tensor(shape, std::move(values)));
    } else if (dtype == 1) {
      QuantTensor q;
      q.shape = shape;
      q.scale = detail::get_le<float>(is);
      q.codes.resize(n);
      for (auto& c : q.codes) c = detail::get_le<std::int8_t>(is);
      store.set(name, std::move(q));
    } else {
      throw Error(ErrorCode::io, "unknown dtype code " + std::to_string(dtype) +
                                     " for entry '" + name + "'");
    }
  }
  return store;
}

inline void save_weights(const std::string& path, const WeightStore& store) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io, "cannot open for writing: " + path);
  write_weights(os, store);
}

inline WeightStore load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::io, "weights not found: " + path);
  return read_weights(is);
}

}  // namespace rnb
