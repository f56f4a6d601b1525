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

// ValidSig: f_{vk,m,sigma}(vk', m', sigma') = [vk = vk'] and Ver(vk, m', sigma').
// Hypotheses are representations (vk, m, sigma) or bottom for all-zeroes.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "oretrace/common.hpp"
#include "oretrace/enc_thresh.hpp"
#include "oretrace/signature.hpp"

namespace oretrace {

struct SigTriple {
  Bytes vk;
  Bytes m;
  Bytes sigma;

  // lp(vk) | lp(m) | lp(sigma)
  Bytes encode() const {
    ByteWriter w;
    w.prefixed(vk).prefixed(m).prefixed(sigma);
    return std::move(w).take();
  }
  friend bool operator==(const SigTriple& a, const SigTriple& b) {
    return a.encode() == b.encode();
  }
};

using Representation = std::optional<SigTriple>;

inline std::size_t message_bytes(unsigned ell) { return (ell + 7) / 8; }

// Uniform ell-bit message, big-endian, high bits of the first byte cleared.
inline Bytes random_message(unsigned ell, Rng& rng) {
  if (ell == 0) throw UsageError("random_message: ell must be >= 1");
  Bytes m = rng.bytes(message_bytes(ell));
  if (ell % 8 != 0) m[0] &= std::uint8_t((1u << (ell % 8)) - 1);
  return m;
}

template <class Sig = Ed25519>
struct ValidSigConcept {
  Bytes vk;
  Bytes m;
  Bytes sigma;
  unsigned ell = 0;
};

template <class Sig>
bool evaluate_validsig(const Sig& sig, const ValidSigConcept<Sig>& f,
                       const SigTriple& x) {
  return x.vk == f.vk && sig.ver(f.vk, x.m, x.sigma);
}

// Evaluates a representation as a hypothesis.
template <class Sig>
bool evaluate_representation(const Sig& sig, const Representation& rep,
                             const SigTriple& x) {
  if (!rep) return false;
  return x.vk == rep->vk && sig.ver(rep->vk, x.m, x.sigma);
}

struct LabeledTriple {
  SigTriple x;
  bool label = false;
};

// First positive example's triple, else bottom.
inline Representation validsig_learn(const std::vector<LabeledTriple>& sample) {
  for (const LabeledTriple& e : sample) {
    if (e.label) return e.x;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Distributions over triples for a fixed target.

enum class SigDistFamily { kPositiveHeavy, kNegativeHeavy, kMixed };

inline const char* to_string(SigDistFamily f) {
  switch (f) {
    case SigDistFamily::kPositiveHeavy: return "positive_heavy";
    case SigDistFamily::kNegativeHeavy: return "negative_heavy";
    case SigDistFamily::kMixed: return "mixed";
  }
  return "?";
}

// Positives are fresh signatures under the target key. Negatives are split
// evenly between valid signatures under a foreign key and target-key
// signatures with one bit flipped.
template <class Sig = Ed25519>
class TripleDistribution {
 public:
  TripleDistribution(const Sig& sig, typename Sig::KeyPair target,
                     typename Sig::KeyPair foreign, unsigned ell,
                     double positive_weight)
      : sig_(&sig),
        target_(std::move(target)),
        foreign_(std::move(foreign)),
        ell_(ell),
        pos_(positive_weight) {}

  static double positive_weight(SigDistFamily f) {
    switch (f) {
      case SigDistFamily::kPositiveHeavy: return 0.9;
      case SigDistFamily::kNegativeHeavy: return 0.02;
      case SigDistFamily::kMixed: return 0.5;
    }
    return 0.5;
  }

  SigTriple sample(Rng& rng) const {
    Bytes m = random_message(ell_, rng);
    if (rng.bernoulli(pos_)) {
      return {target_.vk, m, sig_->sign(target_.sk, m, rng)};
    }
    if (rng.coin()) return {foreign_.vk, m, sig_->sign(foreign_.sk, m, rng)};
    Bytes s = sig_->sign(target_.sk, m, rng);
    std::uint64_t bit = rng.uniform_below(s.size() * 8);
    s[bit / 8] ^= std::uint8_t(1u << (bit % 8));
    return {target_.vk, m, std::move(s)};
  }

  double positive_mass() const { return pos_; }

 private:
  const Sig* sig_;
  typename Sig::KeyPair target_;
  typename Sig::KeyPair foreign_;
  unsigned ell_;
  double pos_;
};

template <class Sig>
ErrorEstimate validsig_error(const Sig& sig, const Representation& rep,
                             const ValidSigConcept<Sig>& f,
                             const TripleDistribution<Sig>& dist,
                             std::size_t samples, Rng& rng) {
  if (samples == 0) throw UsageError("validsig_error: samples must be >= 1");
  ErrorEstimate est;
  est.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    SigTriple x = dist.sample(rng);
    bool hv = evaluate_representation(sig, rep, x);
    bool fv = evaluate_validsig(sig, f, x);
    est.disagreements += hv != fv;
    est.false_positives += hv && !fv;
  }
  est.error = double(est.disagreements) / double(samples);
  return est;
}

// ---------------------------------------------------------------------------
// Reidentification: x_0..x_n are i.i.d. (vk, m, Sign(sk, m)); all positive.

template <class Sig = Ed25519>
struct ValidSigState {
  typename Sig::KeyPair keys;
  unsigned ell = 0;
  std::vector<SigTriple> xs;  // x_1..x_n at [0, n)
  SigTriple x0;

  std::vector<LabeledTriple> sample() const {
    std::vector<LabeledTriple> s;
    s.reserve(xs.size());
    for (const auto& x : xs) s.push_back({x, true});
    return s;
  }
  std::vector<LabeledTriple> sample_without(std::size_t i) const {
    if (i < 1 || i > xs.size()) throw UsageError("sample_without: index outside [1, n]");
    std::vector<LabeledTriple> s = sample();
    s[i - 1] = {x0, true};
    return s;
  }
};

template <class Sig>
ValidSigState<Sig> validsig_gen_ex(const Sig& sig, std::size_t n, unsigned ell,
                                   Rng& rng) {
  if (n == 0) throw UsageError("validsig_gen_ex: n must be >= 1");
  ValidSigState<Sig> st;
  st.keys = sig.gen(rng);
  st.ell = ell;
  auto draw = [&] {
    Bytes m = random_message(ell, rng);
    Bytes s = sig.sign(st.keys.sk, m, rng);
    return SigTriple{st.keys.vk, std::move(m), std::move(s)};
  };
  st.x0 = draw();
  for (std::size_t i = 0; i < n; ++i) st.xs.push_back(draw());
  return st;
}

// Least 1-based i with x_i equal to the representation, else bottom.
template <class Sig>
std::optional<std::size_t> validsig_trace_ex(const ValidSigState<Sig>& st,
                                             const Representation& rep) {
  if (!rep) return std::nullopt;
  const Bytes target = rep->encode();
  for (std::size_t i = 0; i < st.xs.size(); ++i) {
    if (st.xs[i].encode() == target) return i + 1;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Weak forgery.

template <class Sig>
class SigningOracle {
 public:
  SigningOracle(const Sig& sig, typename Sig::SigningKey sk)
      : sig_(&sig), sk_(std::move(sk)) {}

  Bytes sign(const Bytes& m, Rng& rng) {
    Bytes s = sig_->sign(sk_, m, rng);
    queried_.insert(SigTriple{{}, m, s}.encode());
    return s;
  }
  bool was_queried(const Bytes& m, const Bytes& s) const {
    return queried_.count(SigTriple{{}, m, s}.encode()) != 0;
  }
  std::size_t queries() const { return queried_.size(); }

 private:
  const Sig* sig_;
  typename Sig::SigningKey sk_;
  std::set<Bytes> queried_;
};

struct ForgeryAttempt {
  std::optional<std::pair<Bytes, Bytes>> forgery;  // (m*, sigma*)
  bool valid = false;      // Ver(vk, m*, sigma*) = 1
  bool fresh = false;      // (m*, sigma*) was never returned by the oracle
  bool win() const { return forgery && valid && fresh; }
};

// Queries the oracle on n random messages, hands the learner the positive
// sample (vk, m_i, sigma_i, 1) and outputs the (m, sigma) of its
// representation. Learner: (sample, rng) -> Representation.
template <class Sig, class Learner>
ForgeryAttempt forgery_adversary(const Sig& sig, Learner&& learner,
                                 std::size_t n, unsigned ell,
                                 SigningOracle<Sig>& oracle, const Bytes& vk,
                                 Rng& rng) {
  std::vector<LabeledTriple> sample;
  for (std::size_t i = 0; i < n; ++i) {
    Bytes m = random_message(ell, rng);
    Bytes s = oracle.sign(m, rng);
    sample.push_back({{vk, std::move(m), std::move(s)}, true});
  }
  Representation rep = learner(sample, rng);
  ForgeryAttempt out;
  if (!rep) return out;
  out.forgery = std::make_pair(rep->m, rep->sigma);
  out.valid = rep->vk == vk && sig.ver(vk, rep->m, rep->sigma);
  out.fresh = !oracle.was_queried(rep->m, rep->sigma);
  return out;
}

// ---------------------------------------------------------------------------
// Back-end checks.

struct SignatureCheckReport {
  std::size_t round_trips = 0;
  std::size_t round_trip_failures = 0;
  std::size_t flips = 0;
  std::size_t flips_accepted = 0;
  std::size_t malleations = 0;
  std::size_t malleations_accepted = 0;
  bool passed() const {
    return round_trip_failures == 0 && flips_accepted == 0 &&
           malleations_accepted == 0;
  }
};

// Adds the Ed25519 group order L to the scalar half of a signature. The
// result is a second encoding of the same (R, S mod L); a strongly
// unforgeable verifier must reject it.
inline Bytes malleate_ed25519(const Bytes& sig) {
  static constexpr std::uint8_t kL[32] = {
      0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58, 0xd6, 0x9c, 0xf7,
      0xa2, 0xde, 0xf9, 0xde, 0x14, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10};
  if (sig.size() != 64) throw UsageError("malleate_ed25519: bad signature size");
  Bytes out = sig;
  unsigned carry = 0;
  for (std::size_t i = 0; i < 32; ++i) {  // little-endian S at bytes 32..63
    unsigned s = unsigned(out[32 + i]) + kL[i] + carry;
    out[32 + i] = std::uint8_t(s);
    carry = s >> 8;
  }
  return out;
}

template <class Sig>
SignatureCheckReport check_signature_backend(const Sig& sig, unsigned ell,
                                             std::size_t trials, Rng& rng) {
  SignatureCheckReport rep;
  auto kp = sig.gen(rng);
  for (std::size_t i = 0; i < trials; ++i) {
    Bytes m = random_message(ell, rng);
    Bytes s = sig.sign(kp.sk, m, rng);
    ++rep.round_trips;
    if (!sig.ver(kp.vk, m, s)) ++rep.round_trip_failures;

    Bytes f = s;
    std::uint64_t bit = rng.uniform_below(f.size() * 8);
    f[bit / 8] ^= std::uint8_t(1u << (bit % 8));
    ++rep.flips;
    if (sig.ver(kp.vk, m, f)) ++rep.flips_accepted;

    if constexpr (std::is_same_v<Sig, Ed25519>) {
      ++rep.malleations;
      if (sig.ver(kp.vk, m, malleate_ed25519(s))) ++rep.malleations_accepted;
    }
  }
  return rep;
}

}  // namespace oretrace
