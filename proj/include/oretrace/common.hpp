// Copyright 2026 The oretrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <sodium.h>

#include <algorithm>
#include <initializer_list>
#include <array>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace oretrace {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Thrown when a caller violates an operation's precondition (mismatched
// bit-lengths, out-of-range probabilities, malformed challenges, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void ensure_sodium() {
  static const bool ok = [] { return sodium_init() >= 0; }();
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace detail

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (std::uint8_t v : b) {
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xF]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw UsageError("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw UsageError("invalid hex digit");
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

// Big-endian u32 length prefixes throughout; see docs/formats.md.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  ByteWriter& u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf_.push_back(std::uint8_t(v >> s));
    return *this;
  }
  ByteWriter& u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) buf_.push_back(std::uint8_t(v >> s));
    return *this;
  }
  ByteWriter& raw(ByteView b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  ByteWriter& prefixed(ByteView b) {
    u32(static_cast<std::uint32_t>(b.size()));
    return raw(b);
  }
  Bytes take() && { return std::move(buf_); }
  const Bytes& bytes() const { return buf_; }

 private:
  Bytes buf_;
};

// Non-throwing reader: every accessor reports failure through `ok()` so
// callers can map malformed input to bottom without exceptions.
class ByteReader {
 public:
  explicit ByteReader(ByteView b) : data_(b) {}

  bool u8(std::uint8_t& v) {
    if (pos_ + 1 > data_.size()) return fail();
    v = data_[pos_++];
    return true;
  }
  bool u32(std::uint32_t& v) {
    if (pos_ + 4 > data_.size()) return fail();
    v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
    return true;
  }
  bool u64(std::uint64_t& v) {
    if (pos_ + 8 > data_.size()) return fail();
    v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_++];
    return true;
  }
  bool raw(std::size_t n, ByteView& out) {
    if (n > data_.size() - pos_) return fail();
    out = data_.subspan(pos_, n);
    pos_ += n;
    return true;
  }
  bool prefixed(ByteView& out) {
    std::uint32_t n = 0;
    return u32(n) && raw(n, out);
  }
  bool at_end() const { return pos_ == data_.size(); }
  bool ok() const { return ok_; }

 private:
  bool fail() {
    ok_ = false;
    return false;
  }
  ByteView data_;
  std::size_t pos_ = 0;
  bool ok_ = true;
};

using Key128 = std::array<std::uint8_t, crypto_shorthash_siphashx24_KEYBYTES>;
using Digest256 = std::array<std::uint8_t, 32>;

// SipHash-x24, a 128-bit-output keyed PRF.
inline std::array<std::uint8_t, 16> prf128(const Key128& key, ByteView in) {
  std::array<std::uint8_t, 16> out{};
  crypto_shorthash_siphashx24(out.data(), in.data(), in.size(), key.data());
  return out;
}

// BLAKE2b-256 over a domain label followed by length-prefixed parts.
inline Digest256 hash256(std::string_view domain,
                         std::initializer_list<ByteView> parts) {
  detail::ensure_sodium();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  auto absorb_prefixed = [&st](ByteView b) {
    std::uint8_t len[4] = {std::uint8_t(b.size() >> 24),
                           std::uint8_t(b.size() >> 16),
                           std::uint8_t(b.size() >> 8), std::uint8_t(b.size())};
    crypto_generichash_update(&st, len, 4);
    crypto_generichash_update(&st, b.data(), b.size());
  };
  absorb_prefixed(as_bytes(domain));
  for (ByteView p : parts) absorb_prefixed(p);
  Digest256 out{};
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

template <std::size_t N>
std::array<std::uint8_t, N> derive_key(std::string_view domain, ByteView seed) {
  static_assert(N <= 32);
  Digest256 d = hash256(domain, {seed});
  std::array<std::uint8_t, N> out{};
  std::copy_n(d.begin(), N, out.begin());
  return out;
}

inline std::array<std::uint8_t, 8> be64(std::uint64_t v) {
  std::array<std::uint8_t, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = std::uint8_t(v >> (56 - 8 * i));
  return out;
}

// Deterministic ChaCha20 keystream generator. Satisfies
// UniformRandomBitGenerator; all draws used by the library go through the
// member helpers so streams are reproducible across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;
  using Seed = std::array<std::uint8_t, crypto_stream_chacha20_KEYBYTES>;

  explicit Rng(const Seed& seed) : key_(seed) { detail::ensure_sodium(); }

  static Rng from_u64(std::uint64_t seed) {
    auto s = be64(seed);
    return Rng(derive_key<32>("oretrace.rng.u64", s));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint8_t b[8];
    fill(b);
    std::uint64_t v = 0;
    for (std::uint8_t x : b) v = v << 8 | x;
    return v;
  }

  void fill(std::span<std::uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
      if (pos_ == buf_.size()) refill();
      std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
      std::memcpy(out.data() + done, buf_.data() + pos_, n);
      pos_ += n;
      done += n;
    }
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

  // Unbiased draw from {0, ..., n-1} (Lemire's multiply-and-reject).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw UsageError("uniform_below(0)");
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform over the closed range [lo, hi].
  std::uint64_t uniform_in(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw UsageError("uniform_in: empty range");
    if (lo == 0 && hi == max()) return (*this)();
    return lo + uniform_below(hi - lo + 1);
  }

  double uniform01() { return double((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  bool coin() { return ((*this)() & 1) != 0; }

  // Independent child stream; the parent stream is not advanced.
  Rng fork(std::string_view label) const {
    return Rng(hash256("oretrace.rng.fork", {key_, as_bytes(label)}));
  }

  const Seed& seed() const { return key_; }

 private:
  void refill() {
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce =
        be64(block_++);
    crypto_stream_chacha20(buf_.data(), buf_.size(), nonce.data(),
                           key_.data());
    pos_ = 0;
  }

  Seed key_;
  std::array<std::uint8_t, 1024> buf_{};
  std::size_t pos_ = buf_.size();
  std::uint64_t block_ = 0;
};

// Per-trial stream: BLAKE2b("oretrace.trial", be64(master) || be64(index)).
inline Rng derive_trial_rng(std::uint64_t master_seed, std::uint64_t trial) {
  auto s = be64(master_seed);
  auto i = be64(trial);
  return Rng(hash256("oretrace.trial", {s, i}));
}

}  // namespace oretrace
