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

// Statistical queries against encrypted thresholds.
//
// The learner asks (b, alpha/4) to decide whether all-zeroes is good, reads
// params^r one bit at a time with (psi_i, alpha/16), recovers a matching
// secret key, then binary-searches the threshold with (phi_t, alpha/4) where
// phi_t is the weight of h_t = [params = params^r and Dec(sk, c) < t].

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oretrace/common.hpp"
#include "oretrace/enc_thresh.hpp"
#include "oretrace/ore_core.hpp"

namespace oretrace {

// tau_floor = 1 / (64 k ceil(1/alpha)), k = example length in bits.
inline double tau_floor(std::size_t k_bits, double alpha) {
  if (k_bits == 0 || !(alpha > 0 && alpha < 1)) {
    throw UsageError("tau_floor: need k >= 1 and 0 < alpha < 1");
  }
  return 1.0 / (64.0 * double(k_bits) * std::ceil(1.0 / alpha));
}

enum class OracleMode { kExact, kJitter };

inline const char* to_string(OracleMode m) {
  return m == OracleMode::kExact ? "exact" : "jitter";
}

template <OreScheme S>
using StatPredicate = std::function<bool(const Example<S>&, bool)>;

// STAT(c, D) over a finite weighted support; labels are computed once.
template <OreScheme S>
class StatOracle {
 public:
  StatOracle(const S& scheme, const EncThreshConcept<S>& f,
             std::vector<WeightedExample<S>> support, double tau_min,
             OracleMode mode, Rng rng)
      : support_(std::move(support)),
        tau_min_(tau_min),
        mode_(mode),
        rng_(std::move(rng)) {
    labels_.reserve(support_.size());
    for (const auto& p : support_) {
      labels_.push_back(evaluate_concept(scheme, f, p.x));
    }
  }

  double expectation(const StatPredicate<S>& psi) const {
    long double acc = 0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (psi(support_[i].x, labels_[i])) acc += support_[i].weight;
    }
    return static_cast<double>(acc);
  }

  double query(const StatPredicate<S>& psi, double tau) {
    if (!(tau >= tau_min_)) throw UsageError("stat_query: tolerance below floor");
    ++count_;
    double v = expectation(psi);
    if (mode_ == OracleMode::kJitter) v += (2.0 * rng_.uniform01() - 1.0) * tau;
    return v;
  }

  std::size_t query_count() const { return count_; }
  double tau_min() const { return tau_min_; }
  const std::vector<WeightedExample<S>>& support() const { return support_; }

 private:
  std::vector<WeightedExample<S>> support_;
  std::vector<bool> labels_;
  double tau_min_;
  OracleMode mode_;
  Rng rng_;
  std::size_t count_ = 0;
};

template <OreScheme S>
double stat_query(StatOracle<S>& oracle, const StatPredicate<S>& psi,
                  double tau) {
  return oracle.query(psi, tau);
}

// ---------------------------------------------------------------------------
// Key recovery from params.

template <OreScheme S>
using KeyRecovery =
    std::function<std::optional<typename S::SecretKey>(const Bytes& params)>;

// Stands in for brute force: keys registered by the harness at generation
// time, looked up by their params encoding.
template <OreScheme S>
class KeyRegistry {
 public:
  void add(const KeyMaterial<S>& km) { keys_[km.params->encode()] = km.sk; }
  KeyRecovery<S> recovery() const {
    return [this](const Bytes& pp) -> std::optional<typename S::SecretKey> {
      auto it = keys_.find(pp);
      if (it == keys_.end()) return std::nullopt;
      return it->second;
    };
  }

 private:
  std::map<Bytes, typename S::SecretKey> keys_;
};

// Tiny keyspaces: Gen's coin string is restricted to `coin_len` bytes.
template <OreScheme S>
KeyMaterial<S> gen_tiny(const S& scheme, unsigned lambda, unsigned ell,
                        std::uint32_t coins, std::size_t coin_len = 2) {
  Bytes c(coin_len);
  for (std::size_t i = 0; i < coin_len; ++i) {
    c[coin_len - 1 - i] = std::uint8_t(coins >> (8 * i));
  }
  return scheme.gen_from_coins(lambda, ell, c);
}

struct ExhaustiveSearchStats {
  std::uint64_t candidates_tried = 0;
};

// Genuine exhaustive search over every coin string of length coin_len (<= 2).
template <OreScheme S>
KeyRecovery<S> exhaustive_key_search(const S& scheme, unsigned lambda,
                                     unsigned ell, std::size_t coin_len = 2,
                                     ExhaustiveSearchStats* stats = nullptr) {
  if (coin_len == 0 || coin_len > 2) {
    throw UsageError("exhaustive_key_search: coin space limited to 2^16");
  }
  return [&scheme, lambda, ell, coin_len, stats](
             const Bytes& pp) -> std::optional<typename S::SecretKey> {
    const std::uint32_t space = std::uint32_t{1} << (8 * coin_len);
    for (std::uint32_t r = 0; r < space; ++r) {
      if (stats) ++stats->candidates_tried;
      KeyMaterial<S> km = gen_tiny(scheme, lambda, ell, r, coin_len);
      if (km.params->encode() == pp) return km.sk;
    }
    return std::nullopt;
  };
}

// ---------------------------------------------------------------------------
// The learner.

template <OreScheme S>
struct SqHypothesis {
  bool all_zeroes = true;
  ParamsPtr<S> params;
  std::optional<typename S::SecretKey> sk;
  std::uint64_t t = 0;

  bool evaluate(const S& scheme, const Example<S>& x) const {
    if (all_zeroes || !same_params<S>(x.params, params)) return false;
    std::optional<Message> m = scheme.dec(*sk, x.c);
    return m.has_value() && m->value < t;
  }
};

struct SqRunStats {
  std::size_t queries = 0;
  std::size_t params_bits = 0;
  std::size_t search_queries = 0;
  double first_answer = 0;
  bool params_recovered = false;
};

class KeyRecoveryFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `params_bytes` is |params| for the scheme at this ell. Throws
// KeyRecoveryFailed when no key matches the recovered params.
template <OreScheme S>
SqHypothesis<S> sq_learn(const S& scheme, StatOracle<S>& oracle, double alpha,
                         unsigned ell, std::size_t params_bytes,
                         const KeyRecovery<S>& recover,
                         SqRunStats* stats = nullptr) {
  SqRunStats local;
  SqRunStats& st = stats ? *stats : local;
  const std::size_t start = oracle.query_count();

  const double v = oracle.query([](const Example<S>&, bool b) { return b; },
                                alpha / 4);
  st.first_answer = v;
  if (v < alpha / 2) {
    st.queries = oracle.query_count() - start;
    return {};
  }

  Bytes pp(params_bytes, 0);
  for (std::size_t i = 0; i < 8 * params_bytes; ++i) {
    const std::size_t byte = i / 8;
    const unsigned bit = 7 - unsigned(i % 8);
    auto psi = [byte, bit](const Example<S>& x, bool b) {
      if (!b || !x.params) return false;
      const Bytes& enc = x.params->encode();
      return byte < enc.size() && ((enc[byte] >> bit) & 1) != 0;
    };
    if (oracle.query(psi, alpha / 16) > alpha / 8) {
      pp[byte] |= std::uint8_t(1u << bit);
    }
  }
  st.params_bits = 8 * params_bytes;

  std::optional<typename S::SecretKey> sk = recover(pp);
  if (!sk) throw KeyRecoveryFailed("no secret key matches the recovered params");
  st.params_recovered = true;

  // Decryptions under the recovered key are shared by every phi_t.
  std::unordered_map<std::string, std::optional<std::uint64_t>> cache;
  auto plain = [&](const Example<S>& x) -> std::optional<std::uint64_t> {
    std::string key(x.c.bytes.begin(), x.c.bytes.end());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::optional<Message> m = scheme.dec(*sk, x.c);
    std::optional<std::uint64_t> out;
    if (m) out = m->value;
    cache.emplace(std::move(key), out);
    return out;
  };

  std::uint64_t lo = 0, hi = threshold_max(ell);
  std::optional<std::uint64_t> chosen;
  while (lo <= hi && st.search_queries < ell) {
    const std::uint64_t t1 = lo + (hi - lo) / 2;
    auto phi = [&](const Example<S>& x, bool) {
      if (!x.params || x.params->encode() != pp) return false;
      std::optional<std::uint64_t> m = plain(x);
      return m.has_value() && *m < t1;
    };
    const double v1 = oracle.query(phi, alpha / 4);
    ++st.search_queries;
    if (std::fabs(v1 - v) <= alpha / 2) {
      chosen = t1;
      break;
    }
    if (v1 < v - alpha / 2) {
      lo = t1 + 1;
    } else {
      if (t1 == 0) break;
      hi = t1 - 1;
    }
  }
  if (!chosen) chosen = std::min(lo, threshold_max(ell));

  SqHypothesis<S> h;
  h.all_zeroes = false;
  h.params = std::make_shared<const typename S::PublicParams>(
      [&] {
        for (const auto& p : oracle.support()) {
          if (p.x.params && p.x.params->encode() == pp) return *p.x.params;
        }
        throw KeyRecoveryFailed("recovered params absent from the support");
      }());
  h.sk = std::move(sk);
  h.t = *chosen;
  st.queries = oracle.query_count() - start;
  return h;
}

// ---------------------------------------------------------------------------

struct KeyEquivalenceMismatch {
  std::string ciphertext_hex;
  std::optional<std::uint64_t> dec1;
  std::optional<std::uint64_t> dec2;
};

struct KeyEquivalenceReport {
  std::size_t checked = 0;
  std::vector<KeyEquivalenceMismatch> mismatches;
  bool passed() const { return mismatches.empty(); }
};

// Compares Dec under two keys on every encryption of the domain under both
// keys plus `fuzz_count` mutants of each. Requires ell <= 12.
template <OreScheme S>
KeyEquivalenceReport check_key_equivalence(const S& scheme,
                                           const typename S::SecretKey& sk1,
                                           const typename S::SecretKey& sk2,
                                           unsigned ell, std::size_t fuzz_count,
                                           Rng& rng) {
  if (ell > 12) throw UsageError("check_key_equivalence: ell must be <= 12");
  KeyEquivalenceReport rep;
  auto check = [&](const Ciphertext& c) {
    auto d1 = scheme.dec(sk1, c);
    auto d2 = scheme.dec(sk2, c);
    ++rep.checked;
    if (d1.has_value() != d2.has_value() || (d1 && d1->value != d2->value)) {
      rep.mismatches.push_back(
          {to_hex(c.bytes), d1 ? std::optional(d1->value) : std::nullopt,
           d2 ? std::optional(d2->value) : std::nullopt});
    }
  };
  for (const auto* sk : {&sk1, &sk2}) {
    for (std::uint64_t m = 0; m <= domain_max(ell); ++m) {
      check(scheme.enc(*sk, Message::make(m, ell), rng));
    }
    CiphertextFuzzer<S> fuzz(scheme, *sk, ell);
    for (std::size_t i = 0; i < fuzz_count; ++i) check(fuzz.sample(rng).c);
  }
  return rep;
}

}  // namespace oretrace
