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

// A weakly correct, deterministic ORE built from a keyed order-preserving
// function (OPF). It serves as the base scheme of the strengthening
// transformation in ore_strengthen.hpp.
//
// Ciphertext layout (all big-endian):
//
//   0x01 | ell | tag (ceil(3*ell/8) bytes) | payload (ceil(ell/8) bytes)
//        | auth (16 bytes)
//
// tag     = opf_tag(sk, m), a 3*ell-bit integer strictly increasing in m
// payload = m XOR SipHash-x24(k_mask, tag)
// auth    = SipHash-x24(k_auth, 0x01 | ell | tag | payload)
//
// comp reads the two tag fields and nothing else; it never returns bottom.

#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>

#include "oretrace/common.hpp"
#include "oretrace/ore_core.hpp"

namespace oretrace {

// Fixed 256-bit unsigned integer; only what the OPF descent needs.
struct U256 {
  std::array<std::uint64_t, 4> w{};  // little-endian limbs

  static U256 from_u64(std::uint64_t v) {
    U256 r;
    r.w[0] = v;
    return r;
  }

  static U256 pow2(unsigned k) {
    assert(k < 256);
    U256 r;
    r.w[k / 64] = std::uint64_t{1} << (k % 64);
    return r;
  }

  U256 shr(unsigned k) const {
    U256 r;
    const unsigned limbs = k / 64;
    const unsigned bits = k % 64;
    for (unsigned i = 0; i + limbs < 4; ++i) {
      std::uint64_t v = w[i + limbs] >> bits;
      if (bits != 0 && i + limbs + 1 < 4) v |= w[i + limbs + 1] << (64 - bits);
      r.w[i] = v;
    }
    return r;
  }

  // Caller guarantees the product fits in 256 bits.
  U256 mul_small(std::uint64_t s) const {
    U256 r;
    unsigned __int128 carry = 0;
    for (int i = 0; i < 4; ++i) {
      unsigned __int128 p = static_cast<unsigned __int128>(w[i]) * s + carry;
      r.w[i] = static_cast<std::uint64_t>(p);
      carry = p >> 64;
    }
    assert(carry == 0);
    return r;
  }

  U256& operator+=(const U256& o) {
    unsigned __int128 carry = 0;
    for (int i = 0; i < 4; ++i) {
      unsigned __int128 s = static_cast<unsigned __int128>(w[i]) + o.w[i] + carry;
      w[i] = static_cast<std::uint64_t>(s);
      carry = s >> 64;
    }
    return *this;
  }

  U256& operator-=(const U256& o) {
    std::uint64_t borrow = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint64_t a = w[i];
      std::uint64_t d = a - o.w[i] - borrow;
      borrow = (a < o.w[i] || (a == o.w[i] && borrow)) ? 1 : 0;
      w[i] = d;
    }
    return *this;
  }

  friend U256 operator+(U256 a, const U256& b) { return a += b; }
  friend U256 operator-(U256 a, const U256& b) { return a -= b; }

  friend std::strong_ordering operator<=>(const U256& a, const U256& b) {
    for (int i = 3; i >= 0; --i) {
      if (a.w[i] != b.w[i]) return a.w[i] <=> b.w[i];
    }
    return std::strong_ordering::equal;
  }
  friend bool operator==(const U256&, const U256&) = default;

  bool is_zero() const { return (w[0] | w[1] | w[2] | w[3]) == 0; }

  // Lowest out.size() bytes, big-endian.
  void to_be(std::span<std::uint8_t> out) const {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t byte = n - 1 - i;  // significance of out[i]
      out[i] = byte < 32 ? std::uint8_t(w[byte / 8] >> (8 * (byte % 8))) : 0;
    }
  }

  static U256 from_be(ByteView in) {
    U256 r;
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t byte = n - 1 - i;
      if (byte < 32) r.w[byte / 8] |= std::uint64_t(in[i]) << (8 * (byte % 8));
    }
    return r;
  }
};

class OpfScheme {
 public:
  static constexpr std::uint8_t kVersion = 0x01;
  static constexpr std::size_t kAuthBytes = 16;

  struct SecretKey {
    unsigned ell = 0;
    Digest256 seed{};
    Key128 tag_key{};
    Key128 mask_key{};
    Key128 auth_key{};

    static SecretKey from_seed(unsigned ell, const Digest256& seed) {
      check_ell(ell);
      SecretKey sk;
      sk.ell = ell;
      sk.seed = seed;
      sk.tag_key = derive_key<16>("oretrace.opf.tag", seed);
      sk.mask_key = derive_key<16>("oretrace.opf.mask", seed);
      sk.auth_key = derive_key<16>("oretrace.opf.auth", seed);
      return sk;
    }

    // ell || u32 len || seed
    Bytes encode() const {
      ByteWriter w;
      w.u8(static_cast<std::uint8_t>(ell)).prefixed(seed);
      return std::move(w).take();
    }

    static std::optional<SecretKey> decode(ByteView b) {
      ByteReader r(b);
      std::uint8_t ell = 0;
      ByteView seed;
      if (!r.u8(ell) || !r.prefixed(seed) || !r.at_end()) return std::nullopt;
      if (ell < 1 || ell > kMaxEll || seed.size() != 32) return std::nullopt;
      Digest256 s{};
      std::copy(seed.begin(), seed.end(), s.begin());
      return from_seed(ell, s);
    }

    friend bool operator==(const SecretKey& a, const SecretKey& b) {
      return a.ell == b.ell && a.seed == b.seed;
    }
  };

  struct PublicParams {
    unsigned ell = 0;
    std::array<std::uint8_t, 16> key_id{};
    Bytes encoded;  // 0x01 || ell || key_id

    static PublicParams make(unsigned ell,
                             const std::array<std::uint8_t, 16>& id) {
      PublicParams p;
      p.ell = ell;
      p.key_id = id;
      ByteWriter w;
      w.u8(kVersion).u8(static_cast<std::uint8_t>(ell)).raw(id);
      p.encoded = std::move(w).take();
      return p;
    }

    static std::optional<PublicParams> decode(ByteView b) {
      ByteReader r(b);
      std::uint8_t v = 0, ell = 0;
      ByteView id;
      if (!r.u8(v) || !r.u8(ell) || !r.raw(16, id) || !r.at_end()) {
        return std::nullopt;
      }
      if (v != kVersion || ell < 1 || ell > kMaxEll) return std::nullopt;
      std::array<std::uint8_t, 16> a{};
      std::copy(id.begin(), id.end(), a.begin());
      return make(ell, a);
    }

    const Bytes& encode() const { return encoded; }
    friend bool operator==(const PublicParams& a, const PublicParams& b) {
      return a.encoded == b.encoded;
    }
  };

  static constexpr std::size_t coin_bytes(unsigned lambda) {
    return lambda / 8 < 16 ? 16 : lambda / 8;
  }
  static constexpr std::size_t tag_bytes(unsigned ell) {
    return (3 * ell + 7) / 8;
  }
  static constexpr std::size_t payload_bytes(unsigned ell) {
    return (ell + 7) / 8;
  }
  static constexpr std::size_t ciphertext_bytes(unsigned ell) {
    return 2 + tag_bytes(ell) + payload_bytes(ell) + kAuthBytes;
  }

  KeyMaterial<OpfScheme> gen_from_coins(unsigned /*lambda*/, unsigned ell,
                                        ByteView coins) const {
    check_ell(ell);
    Digest256 seed = hash256("oretrace.opf.seed", {coins});
    KeyMaterial<OpfScheme> km{SecretKey::from_seed(ell, seed), nullptr,
                              Bytes(coins.begin(), coins.end())};
    km.params = std::make_shared<const PublicParams>(
        PublicParams::make(ell, derive_key<16>("oretrace.opf.params", seed)));
    return km;
  }

  // Binary descent over the domain. At depth d the tag interval [lo, lo+width)
  // is split at lo + width/4 + floor((width/2) * u / 2^16) where u is a 16-bit
  // value from the PRF of the descent path. One PRF call serves three levels:
  // its eight 16-bit words cover the node and its six descendants.
  U256 opf_tag(const SecretKey& sk, std::uint64_t m) const {
    const unsigned ell = sk.ell;
    U256 lo;
    U256 width = U256::pow2(3 * ell);
    std::array<std::uint8_t, 16> block{};
    for (unsigned d = 0; d < ell; ++d) {
      const unsigned j = d % 3;
      if (j == 0) {
        const std::uint64_t prefix = d == 0 ? 0 : m >> (ell - d);
        std::array<std::uint8_t, 9> in{};
        in[0] = static_cast<std::uint8_t>(d);
        auto p = be64(prefix);
        std::copy(p.begin(), p.end(), in.begin() + 1);
        block = prf128(sk.tag_key, in);
      }
      const std::uint64_t sub =
          j == 0 ? 0 : (m >> (ell - d)) & ((std::uint64_t{1} << j) - 1);
      const std::size_t idx = (std::size_t{1} << j) - 1 + sub;
      const std::uint64_t u =
          std::uint64_t(block[2 * idx]) << 8 | block[2 * idx + 1];

      const U256 half = width.shr(1);
      U256 off = width.shr(2);
      off += width.shr(17).mul_small(u);
      off += U256::from_u64(((half.w[0] & 0xFFFF) * u) >> 16);

      if (((m >> (ell - 1 - d)) & 1) == 0) {
        width = off;
      } else {
        lo += off;
        width -= off;
      }
      assert(!width.is_zero());
    }
    return lo;
  }

  Ciphertext enc(const SecretKey& sk, Message m) const {
    if (m.ell != sk.ell) throw UsageError("enc: message bit-length mismatch");
    const unsigned ell = sk.ell;
    const std::size_t tb = tag_bytes(ell), pb = payload_bytes(ell);
    Bytes out(ciphertext_bytes(ell));
    out[0] = kVersion;
    out[1] = static_cast<std::uint8_t>(ell);
    std::span<std::uint8_t> tag(out.data() + 2, tb);
    opf_tag(sk, m.value).to_be(tag);
    auto mask = prf128(sk.mask_key, tag);
    auto mv = be64(m.value);
    for (std::size_t i = 0; i < pb; ++i) {
      out[2 + tb + i] = mv[8 - pb + i] ^ mask[i];
    }
    auto auth = prf128(sk.auth_key, ByteView(out.data(), 2 + tb + pb));
    std::copy(auth.begin(), auth.end(), out.begin() + 2 + tb + pb);
    return Ciphertext{std::move(out)};
  }

  Ciphertext enc(const SecretKey& sk, Message m, Rng& /*unused*/) const {
    return enc(sk, m);
  }

  std::optional<Message> dec(const SecretKey& sk, const Ciphertext& c) const {
    const unsigned ell = sk.ell;
    const std::size_t tb = tag_bytes(ell), pb = payload_bytes(ell);
    const Bytes& b = c.bytes;
    if (b.size() != ciphertext_bytes(ell) || b[0] != kVersion || b[1] != ell) {
      return std::nullopt;
    }
    auto auth = prf128(sk.auth_key, ByteView(b.data(), 2 + tb + pb));
    if (sodium_memcmp(auth.data(), b.data() + 2 + tb + pb, kAuthBytes) != 0) {
      return std::nullopt;
    }
    ByteView tag(b.data() + 2, tb);
    auto mask = prf128(sk.mask_key, tag);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < pb; ++i) v = v << 8 | (b[2 + tb + i] ^ mask[i]);
    if (v > domain_max(ell)) return std::nullopt;
    // The tag must be the one enc would have produced for v.
    std::array<std::uint8_t, 24> expect{};
    opf_tag(sk, v).to_be(std::span(expect.data(), tb));
    if (!std::equal(tag.begin(), tag.end(), expect.begin())) return std::nullopt;
    return Message{v, ell};
  }

  // Header and tag of `tag_from` joined to the payload and auth fields of
  // `payload_from`. Comp reads the first tag, Dec rejects the result.
  static Ciphertext splice_fields(const Ciphertext& tag_from,
                                  const Ciphertext& payload_from,
                                  unsigned ell) {
    const std::size_t cut = 2 + tag_bytes(ell);
    if (tag_from.bytes.size() != ciphertext_bytes(ell) ||
        payload_from.bytes.size() != ciphertext_bytes(ell)) {
      throw UsageError("splice_fields: inputs must be well-formed");
    }
    Bytes out(tag_from.bytes.begin(), tag_from.bytes.begin() + cut);
    out.insert(out.end(), payload_from.bytes.begin() + cut,
               payload_from.bytes.end());
    return Ciphertext{std::move(out)};
  }

  // Compares the tag fields only; short inputs are zero-padded.
  CompareResult comp(const PublicParams& pp, const Ciphertext& c0,
                     const Ciphertext& c1) const {
    const std::size_t tb = tag_bytes(pp.ell);
    for (std::size_t i = 0; i < tb; ++i) {
      const std::uint8_t a = 2 + i < c0.bytes.size() ? c0.bytes[2 + i] : 0;
      const std::uint8_t b = 2 + i < c1.bytes.size() ? c1.bytes[2 + i] : 0;
      if (a != b) return a < b ? CompareResult::kLess : CompareResult::kGreater;
    }
    return CompareResult::kEqual;
  }
};

static_assert(DeterministicOreScheme<OpfScheme>);

}  // namespace oretrace
