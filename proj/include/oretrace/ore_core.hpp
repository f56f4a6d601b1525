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

// Order-revealing encryption: data model, scheme concept, reference
// comparators and the executable correctness checkers.

#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oretrace/common.hpp"

namespace oretrace {

constexpr unsigned kMaxEll = 64;

// Largest plaintext for bit-length ell. The domain is {0, ..., 2^ell - 1}.
constexpr std::uint64_t domain_max(unsigned ell) {
  return ell >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << ell) - 1;
}

inline void check_ell(unsigned ell) {
  if (ell < 1 || ell > kMaxEll) {
    throw UsageError("plaintext bit-length must be in [1, 64], got " +
                     std::to_string(ell));
  }
}

struct Message {
  std::uint64_t value = 0;
  unsigned ell = 1;

  static Message make(std::uint64_t value, unsigned ell) {
    check_ell(ell);
    if (value > domain_max(ell)) {
      throw UsageError("message " + std::to_string(value) +
                       " outside domain of bit-length " + std::to_string(ell));
    }
    return Message{value, ell};
  }

  friend bool operator==(const Message&, const Message&) = default;
};

enum class Ordering3 : std::uint8_t { kLess, kEqual, kGreater };

enum class CompareResult : std::uint8_t { kLess, kEqual, kGreater, kBottom };

constexpr CompareResult to_result(Ordering3 o) {
  switch (o) {
    case Ordering3::kLess: return CompareResult::kLess;
    case Ordering3::kEqual: return CompareResult::kEqual;
    case Ordering3::kGreater: return CompareResult::kGreater;
  }
  return CompareResult::kBottom;
}

constexpr const char* to_string(Ordering3 o) {
  switch (o) {
    case Ordering3::kLess: return "<";
    case Ordering3::kEqual: return "=";
    case Ordering3::kGreater: return ">";
  }
  return "?";
}

constexpr const char* to_string(CompareResult r) {
  switch (r) {
    case CompareResult::kLess: return "<";
    case CompareResult::kEqual: return "=";
    case CompareResult::kGreater: return ">";
    case CompareResult::kBottom: return "bot";
  }
  return "?";
}

// Ciphertexts are raw bytes: version || ell || body. Anything is admissible as
// input to dec/comp.
struct Ciphertext {
  Bytes bytes;
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

template <class S>
struct KeyMaterial {
  typename S::SecretKey sk;
  std::shared_ptr<const typename S::PublicParams> params;
  Bytes coins;  // the coin string r that produced (sk, params)
};

template <class S>
concept OreScheme =
    requires(const S& s, const typename S::SecretKey& sk,
             const typename S::PublicParams& pp, const Ciphertext& c,
             Message m, Rng& rng, ByteView coins, unsigned n) {
      { S::coin_bytes(n) } -> std::convertible_to<std::size_t>;
      { s.gen_from_coins(n, n, coins) } -> std::same_as<KeyMaterial<S>>;
      { s.enc(sk, m, rng) } -> std::same_as<Ciphertext>;
      { s.dec(sk, c) } -> std::same_as<std::optional<Message>>;
      { s.comp(pp, c, c) } -> std::same_as<CompareResult>;
      { pp.encode() } -> std::convertible_to<const Bytes&>;
      { pp == pp } -> std::convertible_to<bool>;
      { sk.ell } -> std::convertible_to<unsigned>;
    };

// A scheme whose encryption takes no coins.
template <class S>
concept DeterministicOreScheme =
    OreScheme<S> && requires(const S& s, const typename S::SecretKey& sk,
                             Message m) {
      { s.enc(sk, m) } -> std::same_as<Ciphertext>;
    };

template <OreScheme S>
KeyMaterial<S> gen(const S& scheme, unsigned lambda, unsigned ell, Rng& rng) {
  check_ell(ell);
  Bytes coins = rng.bytes(S::coin_bytes(lambda));
  return scheme.gen_from_coins(lambda, ell, coins);
}

inline Ordering3 comp_plain(const Message& m0, const Message& m1) {
  if (m0.ell != m1.ell) {
    throw UsageError("comp_plain: mismatched bit-lengths " +
                     std::to_string(m0.ell) + " and " + std::to_string(m1.ell));
  }
  if (m0.value < m1.value) return Ordering3::kLess;
  if (m0.value > m1.value) return Ordering3::kGreater;
  return Ordering3::kEqual;
}

template <OreScheme S>
CompareResult comp_ciph(const S& scheme, const typename S::SecretKey& sk,
                        const Ciphertext& c0, const Ciphertext& c1) {
  std::optional<Message> m0 = scheme.dec(sk, c0);
  if (!m0) return CompareResult::kBottom;
  std::optional<Message> m1 = scheme.dec(sk, c1);
  if (!m1) return CompareResult::kBottom;
  return to_result(comp_plain(*m0, *m1));
}

// ---------------------------------------------------------------------------
// Correctness checkers.

struct DecryptionFailure {
  std::uint64_t message;
  std::size_t key_index;
  std::string coins_hex;
  bool decrypted_to_bottom;
};

struct DecryptionReport {
  std::size_t checked = 0;
  std::vector<DecryptionFailure> failures;
  bool passed() const { return failures.empty(); }
};

// Every message in `messages` is encrypted and decrypted under each of `keys`
// freshly generated keys.
template <OreScheme S>
DecryptionReport check_decryption_correctness(
    const S& scheme, unsigned lambda, unsigned ell,
    std::span<const std::uint64_t> messages, std::size_t keys, Rng& rng) {
  DecryptionReport report;
  for (std::size_t k = 0; k < keys; ++k) {
    KeyMaterial<S> km = gen(scheme, lambda, ell, rng);
    for (std::uint64_t v : messages) {
      Message m = Message::make(v, ell);
      std::optional<Message> back = scheme.dec(km.sk, scheme.enc(km.sk, m, rng));
      ++report.checked;
      if (!back || *back != m) {
        report.failures.push_back({v, k, to_hex(km.coins), !back.has_value()});
      }
    }
  }
  return report;
}

struct ComparisonMismatch {
  std::uint64_t m0;
  std::uint64_t m1;
  CompareResult got;
  Ordering3 expected;
};

struct WeakCorrectnessReport {
  std::size_t checked = 0;
  std::size_t mismatch_count = 0;
  std::vector<ComparisonMismatch> mismatches;  // first 64 only
  bool passed() const { return mismatch_count == 0; }
};

// comp(params, enc(m0), enc(m1)) against comp_plain(m0, m1), one fresh key per
// `pairs_per_key` pairs.
template <OreScheme S>
WeakCorrectnessReport check_weak_correctness(
    const S& scheme, unsigned lambda, unsigned ell,
    std::span<const std::pair<std::uint64_t, std::uint64_t>> pairs, Rng& rng,
    std::size_t pairs_per_key = std::numeric_limits<std::size_t>::max(),
    const std::function<void(std::uint64_t, std::uint64_t, CompareResult,
                             Ordering3)>& observe = {}) {
  WeakCorrectnessReport report;
  std::optional<KeyMaterial<S>> km;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!km || (pairs_per_key != 0 && i % pairs_per_key == 0 && i != 0)) {
      km = gen(scheme, lambda, ell, rng);
    }
    Message m0 = Message::make(pairs[i].first, ell);
    Message m1 = Message::make(pairs[i].second, ell);
    CompareResult got = scheme.comp(*km->params, scheme.enc(km->sk, m0, rng),
                                    scheme.enc(km->sk, m1, rng));
    Ordering3 want = comp_plain(m0, m1);
    if (observe) observe(m0.value, m1.value, got, want);
    ++report.checked;
    if (got != to_result(want)) {
      ++report.mismatch_count;
      if (report.mismatches.size() < 64) {
        report.mismatches.push_back({m0.value, m1.value, got, want});
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Ciphertext fuzzing.

enum class MutationClass : std::uint8_t {
  kValid,
  kBitFlip,
  kTruncate,
  kRandom,
  kSplice
};
constexpr std::size_t kMutationClasses = 5;

constexpr const char* to_string(MutationClass c) {
  switch (c) {
    case MutationClass::kValid: return "valid";
    case MutationClass::kBitFlip: return "bitflip";
    case MutationClass::kTruncate: return "truncate";
    case MutationClass::kRandom: return "random";
    case MutationClass::kSplice: return "splice";
  }
  return "?";
}

struct FuzzWeights {
  // valid, bit-flip, truncate, random, splice
  std::array<double, kMutationClasses> w = {0.2, 0.2, 0.2, 0.2, 0.2};
};

struct FuzzedCiphertext {
  Ciphertext c;
  MutationClass cls;
};

// Emits honest encryptions of uniform messages and mutants of them. Splice
// joins the prefix of one honest ciphertext to the suffix of another at a
// random cut, which keeps the length but mixes components.
template <OreScheme S>
class CiphertextFuzzer {
 public:
  CiphertextFuzzer(const S& scheme, const typename S::SecretKey& sk,
                   unsigned ell, FuzzWeights weights = {})
      : scheme_(scheme), sk_(sk), ell_(ell), weights_(weights) {}

  FuzzedCiphertext sample(Rng& rng) const {
    MutationClass cls = pick_class(rng);
    Ciphertext base = honest(rng);
    switch (cls) {
      case MutationClass::kValid:
        break;
      case MutationClass::kBitFlip:
        if (!base.bytes.empty()) {
          std::uint64_t bit = rng.uniform_below(base.bytes.size() * 8);
          base.bytes[bit / 8] ^= std::uint8_t(1u << (bit % 8));
        }
        break;
      case MutationClass::kTruncate:
        base.bytes.resize(rng.uniform_below(base.bytes.size()));
        break;
      case MutationClass::kRandom:
        base.bytes = rng.bytes(rng.uniform_in(0, 2 * base.bytes.size() + 8));
        break;
      case MutationClass::kSplice: {
        Ciphertext other = honest(rng);
        std::size_t n = std::min(base.bytes.size(), other.bytes.size());
        std::size_t cut = rng.uniform_below(n + 1);
        std::copy(other.bytes.begin() + cut, other.bytes.begin() + n,
                  base.bytes.begin() + cut);
        break;
      }
    }
    return {std::move(base), cls};
  }

 private:
  Ciphertext honest(Rng& rng) const {
    Message m = Message::make(rng.uniform_in(0, domain_max(ell_)), ell_);
    return scheme_.enc(sk_, m, rng);
  }

  MutationClass pick_class(Rng& rng) const {
    double total = 0;
    for (double w : weights_.w) total += w;
    double u = rng.uniform01() * total;
    for (std::size_t i = 0; i < kMutationClasses; ++i) {
      if (u < weights_.w[i]) return static_cast<MutationClass>(i);
      u -= weights_.w[i];
    }
    return MutationClass::kValid;
  }

  const S& scheme_;
  const typename S::SecretKey& sk_;
  unsigned ell_;
  FuzzWeights weights_;
};

struct StrongMismatch {
  std::string c0_hex;
  std::string c1_hex;
  MutationClass cls0;
  MutationClass cls1;
  CompareResult comp;
  CompareResult comp_ciph;
};

struct StrongCorrectnessReport {
  std::size_t pairs = 0;
  std::size_t mismatch_count = 0;
  // Indexed by MutationClass; a pair counts toward both of its classes.
  std::array<std::size_t, kMutationClasses> pairs_by_class{};
  std::array<std::size_t, kMutationClasses> mismatches_by_class{};
  std::array<std::size_t, 2> bottom_agreements{};  // {comp=bot, both=bot}
  std::vector<StrongMismatch> mismatches;  // first 16 only
  bool passed() const { return mismatch_count == 0; }
};

struct StrongPairOutcome {
  CompareResult comp;
  CompareResult comp_ciph;
  bool agree() const { return comp == comp_ciph; }
};

// Records one pair in the report; exposed so witnesses built outside the fuzzer
// go through the identical comparison.
template <OreScheme S>
StrongPairOutcome record_strong_pair(const S& scheme, const KeyMaterial<S>& km,
                                     const FuzzedCiphertext& a,
                                     const FuzzedCiphertext& b,
                                     StrongCorrectnessReport& report) {
  CompareResult public_cmp = scheme.comp(*km.params, a.c, b.c);
  CompareResult secret_cmp = comp_ciph(scheme, km.sk, a.c, b.c);
  ++report.pairs;
  ++report.pairs_by_class[static_cast<std::size_t>(a.cls)];
  if (a.cls != b.cls) ++report.pairs_by_class[static_cast<std::size_t>(b.cls)];
  if (public_cmp == CompareResult::kBottom) {
    ++report.bottom_agreements[0];
    if (secret_cmp == CompareResult::kBottom) ++report.bottom_agreements[1];
  }
  if (public_cmp == secret_cmp) return {public_cmp, secret_cmp};
  ++report.mismatch_count;
  ++report.mismatches_by_class[static_cast<std::size_t>(a.cls)];
  if (a.cls != b.cls) {
    ++report.mismatches_by_class[static_cast<std::size_t>(b.cls)];
  }
  if (report.mismatches.size() < 16) {
    report.mismatches.push_back({to_hex(a.c.bytes), to_hex(b.c.bytes), a.cls,
                                 b.cls, public_cmp, secret_cmp});
  }
  return {public_cmp, secret_cmp};
}

// comp(params, c0, c1) == comp_ciph(sk, c0, c1) on fuzzed pairs, including
// agreement on bottom. A fresh key is drawn every `pairs_per_key` pairs.
template <OreScheme S>
StrongCorrectnessReport check_strong_correctness(
    const S& scheme, unsigned lambda, unsigned ell, std::size_t trials,
    Rng& rng, FuzzWeights weights = {}, std::size_t pairs_per_key = 1000,
    const std::function<void(const FuzzedCiphertext&, const FuzzedCiphertext&,
                             StrongPairOutcome)>& observe = {}) {
  StrongCorrectnessReport report;
  std::optional<KeyMaterial<S>> km;
  for (std::size_t i = 0; i < trials; ++i) {
    if (!km || (pairs_per_key != 0 && i % pairs_per_key == 0 && i != 0)) {
      km = gen(scheme, lambda, ell, rng);
    }
    CiphertextFuzzer<S> fuzz(scheme, km->sk, ell, weights);
    FuzzedCiphertext a = fuzz.sample(rng);
    FuzzedCiphertext b = fuzz.sample(rng);
    StrongPairOutcome out = record_strong_pair(scheme, *km, a, b, report);
    if (observe) observe(a, b, out);
  }
  return report;
}

}  // namespace oretrace
