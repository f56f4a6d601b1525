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

// Weak-to-strong comparison correctness.
//
// Given a weakly correct ORE (Gen', Enc', Dec', Comp') with deterministic Enc',
// Strengthened<Base, Cert> commits to sk' at key generation and attaches a
// certificate to every ciphertext attesting that c' = Enc'(sk'', m'') for the
// committed key. dec and comp both return bottom for any ciphertext whose
// certificate fails, and delegate to the base scheme otherwise.
//
// Strengthened ciphertext layout:
//
//   0x02 | ell | u32 len | c' | u32 len | certificate
//
// Canonical statement encoding (what signature certificates sign):
//
//   u32 len | "oretrace.stmt.v1" | u32 len | params' | u32 len | sigma
//   | u32 len | c'
//
// Two certifier back-ends are provided:
//   * SignatureCertifier: certify signs the statement with a key generated
//     inside gen; publicly verifiable, computationally sound.
//   * EscrowCertifier: the verification key seals sk' and verify accepts iff
//     c' = Enc'(sk', Dec'(sk', c')). Perfectly sound and complete, but the
//     public parameters carry the secret key, so it is for simulation only.

#pragma once

#include <cstring>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "oretrace/common.hpp"
#include "oretrace/ore_core.hpp"
#include "oretrace/signature.hpp"

namespace oretrace {

// ---------------------------------------------------------------------------
// Commitments: Com(v; r) = BLAKE2b-256("oretrace.commit.v1", v, r).

struct Commitment {
  Digest256 bytes{};
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

inline Commitment commit(ByteView value, ByteView randomness) {
  return Commitment{hash256("oretrace.commit.v1", {value, randomness})};
}

struct BindingCollision {
  std::uint64_t value_a;
  std::uint64_t value_b;
  std::size_t rand_a;
  std::size_t rand_b;
};

struct BindingReport {
  std::size_t commitments = 0;
  std::vector<BindingCollision> collisions;
  bool passed() const { return collisions.empty(); }
};

// Exhaustive search for two distinct committed values sharing a commitment.
// Values are be64(v) for v < value_count; the k-th randomness string is
// BLAKE2b("oretrace.commit.rand", be64(k)).
inline BindingReport binding_check(std::uint64_t value_count,
                                   std::size_t rand_count) {
  if (value_count > (std::uint64_t{1} << 16)) {
    throw UsageError("binding_check is limited to 2^16 values");
  }
  struct DigestHash {
    std::size_t operator()(const Digest256& d) const {
      std::size_t h = 0;
      std::memcpy(&h, d.data(), sizeof h);
      return h;
    }
  };
  std::vector<Digest256> rands;
  for (std::size_t k = 0; k < rand_count; ++k) {
    rands.push_back(hash256("oretrace.commit.rand", {be64(k)}));
  }
  BindingReport report;
  std::unordered_map<Digest256, std::pair<std::uint64_t, std::size_t>,
                     DigestHash>
      seen;
  for (std::uint64_t v = 0; v < value_count; ++v) {
    auto vb = be64(v);
    for (std::size_t k = 0; k < rand_count; ++k) {
      Commitment c = commit(vb, rands[k]);
      ++report.commitments;
      auto [it, inserted] = seen.try_emplace(c.bytes, v, k);
      if (!inserted && it->second.first != v) {
        report.collisions.push_back({it->second.first, v, it->second.second, k});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Statements and certifiers.

template <class Base>
struct StatementView {
  const typename Base::PublicParams& base_params;
  const Commitment& sigma;
  const Ciphertext& c;
};

template <class Base>
Bytes encode_statement(const StatementView<Base>& x) {
  ByteWriter w;
  w.prefixed(as_bytes("oretrace.stmt.v1"))
      .prefixed(x.base_params.encode())
      .prefixed(x.sigma.bytes)
      .prefixed(x.c.bytes);
  return std::move(w).take();
}

template <class Base>
struct Witness {
  Message m;
  const typename Base::SecretKey& sk;
  ByteView commit_rand;
};

template <class C, class Base>
concept Certifier =
    requires(const C& cert, ByteView coins, const KeyMaterial<Base>& km,
             const Commitment& sigma, const typename C::ProvingKey& pk,
             const typename C::VerifyKey& vk, const StatementView<Base>& x,
             const Witness<Base>& w, ByteView proof) {
      { C::kMode } -> std::convertible_to<std::string_view>;
      { cert.setup(coins, km, sigma) };
      { cert.certify(pk, x, w) } -> std::same_as<Bytes>;
      { cert.verify(vk, x, proof) } -> std::same_as<bool>;
      { vk.encode() } -> std::convertible_to<Bytes>;
    };

template <class Base>
class SignatureCertifier {
 public:
  static constexpr std::string_view kMode = "signature";
  static constexpr std::uint8_t kModeByte = 0x01;

  struct ProvingKey {
    Ed25519::SigningKey sk;
  };
  struct VerifyKey {
    Bytes vk;
    Bytes encode() const { return vk; }
  };

  std::pair<ProvingKey, VerifyKey> setup(ByteView coins,
                                         const KeyMaterial<Base>& /*km*/,
                                         const Commitment& /*sigma*/) const {
    Ed25519::KeyPair kp = sig_.gen_from_seed(coins);
    return {ProvingKey{kp.sk}, VerifyKey{kp.vk}};
  }

  Bytes certify(const ProvingKey& pk, const StatementView<Base>& x,
                const Witness<Base>& /*w*/) const {
    return sig_.sign(pk.sk, encode_statement(x));
  }

  bool verify(const VerifyKey& vk, const StatementView<Base>& x,
              ByteView proof) const {
    return sig_.ver(vk.vk, encode_statement(x), proof);
  }

 private:
  Ed25519 sig_;
};

template <class Base>
  requires DeterministicOreScheme<Base>
class EscrowCertifier {
 public:
  static constexpr std::string_view kMode = "escrow";
  static constexpr std::uint8_t kModeByte = 0x02;

  struct ProvingKey {};
  struct VerifyKey {
    typename Base::SecretKey sealed_sk;
    std::shared_ptr<const typename Base::PublicParams> sealed_params;
    Commitment sigma;
    Bytes encode() const { return sealed_sk.encode(); }
  };

  explicit EscrowCertifier(Base base = {}) : base_(std::move(base)) {}

  std::pair<ProvingKey, VerifyKey> setup(ByteView /*coins*/,
                                         const KeyMaterial<Base>& km,
                                         const Commitment& sigma) const {
    return {ProvingKey{}, VerifyKey{km.sk, km.params, sigma}};
  }

  Bytes certify(const ProvingKey&, const StatementView<Base>&,
                const Witness<Base>&) const {
    return {};
  }

  bool verify(const VerifyKey& vk, const StatementView<Base>& x,
              ByteView proof) const {
    if (!proof.empty()) return false;
    if (!(x.sigma == vk.sigma) || !(x.base_params == *vk.sealed_params)) {
      return false;
    }
    std::optional<Message> m = base_.dec(vk.sealed_sk, x.c);
    return m.has_value() && base_.enc(vk.sealed_sk, *m) == x.c;
  }

 private:
  Base base_;
};

// ---------------------------------------------------------------------------
// The transformation.

template <DeterministicOreScheme Base, template <class> class CertT>
  requires Certifier<CertT<Base>, Base>
class Strengthened {
 public:
  using BaseScheme = Base;
  using Cert = CertT<Base>;
  static constexpr std::uint8_t kVersion = 0x02;

  struct PublicParams {
    unsigned ell = 0;
    std::shared_ptr<const typename Base::PublicParams> base;
    Commitment sigma;
    typename Cert::VerifyKey vk;
    Bytes encoded;  // 0x02 | ell | mode | lp(params') | lp(sigma) | lp(vk)

    const Bytes& encode() const { return encoded; }
    friend bool operator==(const PublicParams& a, const PublicParams& b) {
      return a.encoded == b.encoded;
    }
  };

  struct SecretKey {
    unsigned ell = 0;
    typename Base::SecretKey base;
    Bytes commit_rand;
    typename Cert::ProvingKey pk;
    std::shared_ptr<const PublicParams> params;
  };

  Strengthened() = default;
  Strengthened(Base base, Cert cert)
      : base_(std::move(base)), cert_(std::move(cert)) {}

  const Base& base() const { return base_; }
  const Cert& certifier() const { return cert_; }
  static constexpr std::string_view mode() { return Cert::kMode; }

  static constexpr std::size_t coin_bytes(unsigned lambda) {
    return Base::coin_bytes(lambda);
  }

  KeyMaterial<Strengthened> gen_from_coins(unsigned lambda, unsigned ell,
                                           ByteView coins) const {
    Digest256 base_coins = hash256("oretrace.strengthen.base", {coins});
    KeyMaterial<Base> bkm = base_.gen_from_coins(lambda, ell, base_coins);
    Digest256 r = hash256("oretrace.strengthen.commit", {coins});
    Commitment sigma = commit(bkm.sk.encode(), r);
    Digest256 cert_coins = hash256("oretrace.strengthen.cert", {coins});
    auto [pk, vk] = cert_.setup(cert_coins, bkm, sigma);

    auto pp = std::make_shared<PublicParams>();
    pp->ell = ell;
    pp->base = bkm.params;
    pp->sigma = sigma;
    pp->vk = std::move(vk);
    ByteWriter w;
    w.u8(kVersion)
        .u8(static_cast<std::uint8_t>(ell))
        .u8(Cert::kModeByte)
        .prefixed(pp->base->encode())
        .prefixed(sigma.bytes)
        .prefixed(pp->vk.encode());
    pp->encoded = std::move(w).take();

    KeyMaterial<Strengthened> km;
    km.sk = SecretKey{ell, std::move(bkm.sk), Bytes(r.begin(), r.end()),
                      std::move(pk), pp};
    km.params = std::move(pp);
    km.coins.assign(coins.begin(), coins.end());
    return km;
  }

  Ciphertext enc(const SecretKey& sk, Message m) const {
    Ciphertext inner = base_.enc(sk.base, m);
    StatementView<Base> x{*sk.params->base, sk.params->sigma, inner};
    Bytes proof = cert_.certify(sk.pk, x, Witness<Base>{m, sk.base, sk.commit_rand});
    ByteWriter w;
    w.u8(kVersion)
        .u8(static_cast<std::uint8_t>(sk.ell))
        .prefixed(inner.bytes)
        .prefixed(proof);
    return Ciphertext{std::move(w).take()};
  }

  Ciphertext enc(const SecretKey& sk, Message m, Rng& /*unused*/) const {
    return enc(sk, m);
  }

  std::optional<Message> dec(const SecretKey& sk, const Ciphertext& c) const {
    std::optional<Parsed> p = parse(c, sk.ell);
    if (!p || !verified(*sk.params, *p)) return std::nullopt;
    return base_.dec(sk.base, p->inner);
  }

  CompareResult comp(const PublicParams& pp, const Ciphertext& c0,
                     const Ciphertext& c1) const {
    std::optional<Parsed> p0 = parse(c0, pp.ell);
    if (!p0 || !verified(pp, *p0)) return CompareResult::kBottom;
    std::optional<Parsed> p1 = parse(c1, pp.ell);
    if (!p1 || !verified(pp, *p1)) return CompareResult::kBottom;
    return base_.comp(*pp.base, p0->inner, p1->inner);
  }

  // Splits a strengthened ciphertext into (c', certificate); nullopt when the
  // framing is malformed.
  struct Parsed {
    Ciphertext inner;
    Bytes proof;
  };
  static std::optional<Parsed> parse(const Ciphertext& c, unsigned ell) {
    ByteReader r(c.bytes);
    std::uint8_t v = 0, e = 0;
    ByteView inner, proof;
    if (!r.u8(v) || !r.u8(e) || !r.prefixed(inner) || !r.prefixed(proof) ||
        !r.at_end() || v != kVersion || e != ell) {
      return std::nullopt;
    }
    return Parsed{Ciphertext{Bytes(inner.begin(), inner.end())},
                  Bytes(proof.begin(), proof.end())};
  }

  static Ciphertext frame(unsigned ell, const Ciphertext& inner,
                          ByteView proof) {
    ByteWriter w;
    w.u8(kVersion).u8(static_cast<std::uint8_t>(ell)).prefixed(inner.bytes).prefixed(proof);
    return Ciphertext{std::move(w).take()};
  }

 private:
  bool verified(const PublicParams& pp, const Parsed& p) const {
    StatementView<Base> x{*pp.base, pp.sigma, p.inner};
    return cert_.verify(pp.vk, x, p.proof);
  }

  Base base_;
  Cert cert_;
};

template <DeterministicOreScheme Base, template <class> class CertT>
Strengthened<Base, CertT> strengthen(Base base, CertT<Base> cert) {
  return Strengthened<Base, CertT>(std::move(base), std::move(cert));
}

// Escrow params carry sk', so anyone holding them can decrypt. Used by the
// negative-control adversaries and synthetic hypotheses; returns bottom for
// ciphertexts that fail the certificate check.
template <DeterministicOreScheme Base>
std::optional<Message> escrow_reveal(
    const Strengthened<Base, EscrowCertifier>& scheme,
    const typename Strengthened<Base, EscrowCertifier>::PublicParams& pp,
    const Ciphertext& c) {
  auto p = Strengthened<Base, EscrowCertifier>::parse(c, pp.ell);
  if (!p) return std::nullopt;
  StatementView<Base> x{*pp.base, pp.sigma, p->inner};
  if (!scheme.certifier().verify(pp.vk, x, p->proof)) return std::nullopt;
  return scheme.base().dec(pp.vk.sealed_sk, p->inner);
}

// ---------------------------------------------------------------------------
// Derandomization: Enc(sk, m) = Enc'(sk', m; coins = PRF(k, m)). Lets a base
// scheme with randomized encryption feed the transformation.

template <OreScheme Base>
class Derandomized {
 public:
  using PublicParams = typename Base::PublicParams;
  struct SecretKey {
    unsigned ell = 0;
    typename Base::SecretKey base;
    Digest256 derand_key{};

    Bytes encode() const {
      ByteWriter w;
      w.prefixed(base.encode()).prefixed(derand_key);
      return std::move(w).take();
    }
  };

  Derandomized() = default;
  explicit Derandomized(Base base) : base_(std::move(base)) {}

  static constexpr std::size_t coin_bytes(unsigned lambda) {
    return Base::coin_bytes(lambda);
  }

  KeyMaterial<Derandomized> gen_from_coins(unsigned lambda, unsigned ell,
                                           ByteView coins) const {
    KeyMaterial<Base> bkm = base_.gen_from_coins(
        lambda, ell, hash256("oretrace.derand.base", {coins}));
    KeyMaterial<Derandomized> km;
    km.sk = SecretKey{ell, std::move(bkm.sk),
                      hash256("oretrace.derand.key", {coins})};
    km.params = std::move(bkm.params);
    km.coins.assign(coins.begin(), coins.end());
    return km;
  }

  Ciphertext enc(const SecretKey& sk, Message m) const {
    auto mv = be64(m.value);
    Rng coins(hash256("oretrace.derand.coins", {sk.derand_key, mv}));
    return base_.enc(sk.base, m, coins);
  }
  Ciphertext enc(const SecretKey& sk, Message m, Rng& /*unused*/) const {
    return enc(sk, m);
  }
  std::optional<Message> dec(const SecretKey& sk, const Ciphertext& c) const {
    return base_.dec(sk.base, c);
  }
  CompareResult comp(const PublicParams& pp, const Ciphertext& c0,
                     const Ciphertext& c1) const {
    return base_.comp(pp, c0, c1);
  }

 private:
  Base base_;
};

}  // namespace oretrace
