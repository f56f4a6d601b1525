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

#include <array>
#include <concepts>
#include <cstdint>

#include "oretrace/common.hpp"

namespace oretrace {

template <class S>
concept SignatureScheme =
    requires(const S& s, Rng& rng, const typename S::SigningKey& sk,
             ByteView vk, ByteView msg, ByteView sig) {
      { s.gen(rng) } -> std::same_as<typename S::KeyPair>;
      { s.sign(sk, msg, rng) } -> std::same_as<Bytes>;
      { s.ver(vk, msg, sig) } -> std::same_as<bool>;
    };

// Ed25519 through libsodium. Signing is deterministic and verification
// rejects non-canonical encodings of S, so a second distinct valid signature
// on a signed message cannot be produced by re-encoding.
class Ed25519 {
 public:
  static constexpr std::size_t kSeedBytes = crypto_sign_SEEDBYTES;
  static constexpr std::size_t kVerifyKeyBytes = crypto_sign_PUBLICKEYBYTES;
  static constexpr std::size_t kSignatureBytes = crypto_sign_BYTES;

  struct SigningKey {
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> bytes{};
  };

  struct KeyPair {
    SigningKey sk;
    Bytes vk;
  };

  KeyPair gen_from_seed(ByteView seed) const {
    detail::ensure_sodium();
    auto s = derive_key<kSeedBytes>("oretrace.ed25519.seed", seed);
    KeyPair kp;
    kp.vk.resize(kVerifyKeyBytes);
    crypto_sign_seed_keypair(kp.vk.data(), kp.sk.bytes.data(), s.data());
    return kp;
  }

  KeyPair gen(Rng& rng) const { return gen_from_seed(rng.bytes(kSeedBytes)); }

  Bytes sign(const SigningKey& sk, ByteView msg) const {
    Bytes sig(kSignatureBytes);
    crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(),
                         sk.bytes.data());
    return sig;
  }

  Bytes sign(const SigningKey& sk, ByteView msg, Rng& /*unused*/) const {
    return sign(sk, msg);
  }

  bool ver(ByteView vk, ByteView msg, ByteView sig) const {
    if (vk.size() != kVerifyKeyBytes || sig.size() != kSignatureBytes) {
      return false;
    }
    return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(),
                                       vk.data()) == 0;
  }
};

static_assert(SignatureScheme<Ed25519>);

}  // namespace oretrace
