// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat tensor files:
//
//   bytes 0..3   magic "NGT1"
//   u32          rank (>= 1)
//   u32 x rank   dims
//   f64 x prod(dims) payload
//
// All integers and floats are little-endian.

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "noisygrpo/error.hpp"

namespace noisygrpo {

inline constexpr char kTensorMagic[4] = {'N', 'G', 'T', '1'};

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<double> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

namespace detail {

template <typename U>
void write_le(std::ostream& out, U value) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <typename U>
U read_le(std::istream& in, const char* what) {
  unsigned char buf[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(U))) {
    throw FormatError(std::string("tensor file truncated while reading ") + what);
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline Tensor read_tensor(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != std::string(kTensorMagic, 4)) {
    throw FormatError("not a tensor file (bad magic, expected NGT1)");
  }
  const auto rank = detail::read_le<std::uint32_t>(in, "rank");
  if (rank == 0) throw FormatError("tensor file has rank 0");
  Tensor t;
  t.shape.reserve(rank);
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto d = detail::read_le<std::uint32_t>(in, "dims");
    if (d == 0) throw FormatError("tensor file has a zero-length dimension");
    count *= d;
    if (count > (std::uint64_t{1} << 40)) throw FormatError("tensor file shape is implausibly large");
    t.shape.push_back(d);
  }
  t.data.resize(static_cast<std::size_t>(count));
  for (double& v : t.data) v = std::bit_cast<double>(detail::read_le<std::uint64_t>(in, "payload"));
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("tensor file has trailing bytes");
  return t;
}

inline void write_tensor(std::ostream& out, const Tensor& t) {
  detail::require(!t.shape.empty(), "write_tensor: rank must be >= 1");
  detail::require(t.element_count() == t.data.size(), "write_tensor: shape does not match payload");
  out.write(kTensorMagic, 4);
  detail::write_le(out, static_cast<std::uint32_t>(t.shape.size()));
  for (auto d : t.shape) detail::write_le(out, d);
  for (double v : t.data) detail::write_le(out, std::bit_cast<std::uint64_t>(v));
}

inline Tensor read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open tensor file '" + path + "'");
  return read_tensor(in);
}

inline void write_tensor_file(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write tensor file '" + path + "'");
  write_tensor(out, t);
  if (!out) throw FormatError("failed writing tensor file '" + path + "'");
}

}  // namespace noisygrpo
