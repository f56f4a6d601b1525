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

// Static and static single-challenge indistinguishability games, the hybrid
// schedule between them, and the adversary built from a learner.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oretrace/common.hpp"
#include "oretrace/enc_thresh.hpp"
#include "oretrace/ore_core.hpp"

namespace oretrace {

// Left and right message vectors of equal length.
struct ChallengePair {
  std::vector<std::uint64_t> left;
  std::vector<std::uint64_t> right;
  friend bool operator==(const ChallengePair&, const ChallengePair&) = default;
};

inline bool strictly_ascending(const std::vector<std::uint64_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) ==
         v.end();
}

inline void validate_static(const ChallengePair& ch, unsigned ell) {
  if (ch.left.empty() || ch.left.size() != ch.right.size()) {
    throw UsageError("challenge: sides must be nonempty and of equal length");
  }
  if (!strictly_ascending(ch.left) || !strictly_ascending(ch.right)) {
    throw UsageError("challenge: both sides must be strictly ascending");
  }
  const std::uint64_t top = domain_max(ell);
  if (ch.left.back() > top || ch.right.back() > top) {
    throw UsageError("challenge: message outside the domain");
  }
}

// Position at which a single-challenge pair differs. Requires exactly one
// differing position k with left[k-1] < left[k] < right[k] < left[k+1]; a
// challenge in the first or last slot has no sandwich and is rejected.
inline std::size_t validate_single(const ChallengePair& ch, unsigned ell) {
  validate_static(ch, ell);
  std::optional<std::size_t> pos;
  for (std::size_t i = 0; i < ch.left.size(); ++i) {
    if (ch.left[i] == ch.right[i]) continue;
    if (pos) throw UsageError("single challenge: sides differ in >1 position");
    pos = i;
  }
  if (!pos) throw UsageError("single challenge: sides are identical");
  const std::size_t k = *pos;
  if (k == 0 || k + 1 == ch.left.size()) {
    throw UsageError("single challenge: challenge must sit strictly inside");
  }
  if (!(ch.left[k] < ch.right[k])) {
    throw UsageError("single challenge: requires m_L < m_R");
  }
  return k;
}

// Hybrid j (0 <= j <= 2q). For j <= q position i (1-based) holds
// min(L_i, R_i) when i <= j and L_i otherwise; for j > q it holds
// min(L_i, R_i) when i <= 2q - j and R_i otherwise.
inline std::vector<std::vector<std::uint64_t>> hybrid_schedule(
    const ChallengePair& ch) {
  if (ch.left.size() != ch.right.size()) {
    throw UsageError("hybrid_schedule: sides differ in length");
  }
  const std::size_t q = ch.left.size();
  std::vector<std::vector<std::uint64_t>> out;
  out.reserve(2 * q + 1);
  for (std::size_t j = 0; j <= 2 * q; ++j) {
    const std::size_t cut = j <= q ? j : 2 * q - j;
    const auto& tail = j <= q ? ch.left : ch.right;
    std::vector<std::uint64_t> h(q);
    for (std::size_t i = 1; i <= q; ++i) {
      h[i - 1] = i <= cut ? std::min(ch.left[i - 1], ch.right[i - 1])
                          : tail[i - 1];
    }
    out.push_back(std::move(h));
  }
  return out;
}

// 1/2 + 1/2 (p - q)^2: success probability of the learner-based adversary
// when the hypothesis accepts bucket i*-1 w.p. p and bucket i* w.p. q.
inline double adversary_success_prob(double p, double q) {
  if (!(p >= 0 && p <= 1) || !(q >= 0 && q <= 1)) {
    throw UsageError("adversary_success_prob: p, q must lie in [0,1]");
  }
  return 0.5 + 0.5 * (p - q) * (p - q);
}

// ---------------------------------------------------------------------------
// Game runner.

struct Guess {
  bool bit = false;
  // Set when the adversary gave up (e.g. sampled messages not well spaced)
  // and guessed at random.
  bool flagged = false;
};

template <class A, class S>
concept GameAdversary =
    OreScheme<S> &&
    requires(const A& a, Rng& rng, const typename A::State& st,
             const typename S::PublicParams& pp,
             const std::vector<Ciphertext>& cts) {
      { a.choose_challenge(rng) }
          -> std::same_as<std::pair<ChallengePair, typename A::State>>;
      { a.guess(st, pp, cts, rng) } -> std::same_as<Guess>;
    };

enum class GameKind { kStatic, kSingleChallenge };

inline const char* to_string(GameKind g) {
  return g == GameKind::kStatic ? "static" : "single";
}

struct GameRecord {
  std::uint64_t trial = 0;
  bool b = false;
  bool guess = false;
  bool win = false;
  bool flagged = false;
  // Filled only when transcripts are requested.
  std::string params_hex;
  std::vector<std::string> ciphertexts_hex;
};

struct AdvantageEstimate {
  std::size_t trials = 0;
  std::size_t b0_trials = 0, b0_ones = 0;
  std::size_t b1_trials = 0, b1_ones = 0;
  std::size_t wins = 0;
  std::size_t flagged = 0;
  double advantage = 0;  // |Pr[b'=1 | b=0] - Pr[b'=1 | b=1]|
  double ci_lo = 0, ci_hi = 0;
  double win_rate = 0;
};

// 95% normal-approximation interval, half-width floored at 10/trials.
inline AdvantageEstimate summarize_game(const std::vector<GameRecord>& recs) {
  AdvantageEstimate e;
  e.trials = recs.size();
  for (const GameRecord& r : recs) {
    (r.b ? e.b1_trials : e.b0_trials) += 1;
    if (r.guess) (r.b ? e.b1_ones : e.b0_ones) += 1;
    e.wins += r.win;
    e.flagged += r.flagged;
  }
  if (e.trials == 0) return e;
  const double p0 = e.b0_trials ? double(e.b0_ones) / double(e.b0_trials) : 0;
  const double p1 = e.b1_trials ? double(e.b1_ones) / double(e.b1_trials) : 0;
  double var = 0;
  if (e.b0_trials) var += p0 * (1 - p0) / double(e.b0_trials);
  if (e.b1_trials) var += p1 * (1 - p1) / double(e.b1_trials);
  const double hw = std::max(1.96 * std::sqrt(var), 10.0 / double(e.trials));
  e.advantage = std::fabs(p0 - p1);
  e.ci_lo = std::max(0.0, e.advantage - hw);
  e.ci_hi = std::min(1.0, e.advantage + hw);
  e.win_rate = double(e.wins) / double(e.trials);
  return e;
}

struct GameOptions {
  unsigned lambda = 128;
  unsigned ell = 32;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  bool transcripts = false;
};

struct GameResult {
  GameKind kind = GameKind::kStatic;
  AdvantageEstimate summary;
  std::vector<GameRecord> records;
};

// Each trial draws its own stream from (seed, trial); the challenge is
// validated before any encryption happens.
template <OreScheme S, class A>
  requires GameAdversary<A, S>
GameResult run_game(GameKind kind, const S& scheme, const A& adversary,
                    const GameOptions& opt) {
  GameResult res;
  res.kind = kind;
  res.records.reserve(opt.trials);
  for (std::size_t i = 0; i < opt.trials; ++i) {
    Rng trial = derive_trial_rng(opt.seed, i);
    Rng adv_rng = trial.fork("adversary");
    Rng chal_rng = trial.fork("challenger");
    auto [ch, state] = adversary.choose_challenge(adv_rng);
    if (kind == GameKind::kStatic) {
      validate_static(ch, opt.ell);
    } else {
      validate_single(ch, opt.ell);
    }
    GameRecord rec;
    rec.trial = i;
    rec.b = chal_rng.coin();
    KeyMaterial<S> km = gen(scheme, opt.lambda, opt.ell, chal_rng);
    const auto& msgs = rec.b ? ch.right : ch.left;
    std::vector<Ciphertext> cts;
    cts.reserve(msgs.size());
    for (std::uint64_t m : msgs) {
      cts.push_back(scheme.enc(km.sk, Message::make(m, opt.ell), chal_rng));
    }
    Guess g = adversary.guess(state, *km.params, cts, adv_rng);
    rec.guess = g.bit;
    rec.flagged = g.flagged;
    rec.win = rec.guess == rec.b;
    if (opt.transcripts) {
      rec.params_hex = to_hex(km.params->encode());
      for (const Ciphertext& c : cts) rec.ciphertexts_hex.push_back(to_hex(c.bytes));
    }
    res.records.push_back(std::move(rec));
  }
  res.summary = summarize_game(res.records);
  return res;
}

template <OreScheme S, class A>
GameResult run_static_game(const S& scheme, const A& adversary,
                           const GameOptions& opt) {
  return run_game(GameKind::kStatic, scheme, adversary, opt);
}

template <OreScheme S, class A>
GameResult run_single_challenge_game(const S& scheme, const A& adversary,
                                     const GameOptions& opt) {
  return run_game(GameKind::kSingleChallenge, scheme, adversary, opt);
}

// ---------------------------------------------------------------------------
// Stock adversaries.

// Draws q distinct sorted messages without replacement (q << 2^ell).
inline std::vector<std::uint64_t> sample_sorted_distinct(std::size_t q,
                                                         unsigned ell,
                                                         Rng& rng) {
  const std::uint64_t top = domain_max(ell);
  if (ell < 64 && q > top + 1) throw UsageError("more messages than domain");
  std::vector<std::uint64_t> v;
  while (v.size() < q) {
    std::uint64_t m = rng.uniform_in(0, top);
    if (std::find(v.begin(), v.end(), m) == v.end()) v.push_back(m);
  }
  std::sort(v.begin(), v.end());
  return v;
}

// A random valid challenge of the requested shape. Single-challenge shape
// needs q >= 3 and a gap of at least 3 around the challenge slot, so it is
// redrawn until one exists.
inline ChallengePair random_challenge(GameKind kind, std::size_t q,
                                      unsigned ell, Rng& rng) {
  if (kind == GameKind::kStatic) {
    return {sample_sorted_distinct(q, ell, rng), sample_sorted_distinct(q, ell, rng)};
  }
  if (q < 3) throw UsageError("single challenge needs q >= 3");
  for (;;) {
    std::vector<std::uint64_t> base = sample_sorted_distinct(q, ell, rng);
    std::size_t k = 1 + rng.uniform_below(q - 2);
    if (base[k + 1] - base[k - 1] < 3) continue;
    std::uint64_t a = rng.uniform_in(base[k - 1] + 1, base[k + 1] - 2);
    std::uint64_t b = rng.uniform_in(a + 1, base[k + 1] - 1);
    ChallengePair ch{base, base};
    ch.left[k] = a;
    ch.right[k] = b;
    return ch;
  }
}

struct RandomGuesser {
  struct State {};
  GameKind kind = GameKind::kStatic;
  std::size_t q = 4;
  unsigned ell = 32;

  std::pair<ChallengePair, State> choose_challenge(Rng& rng) const {
    return {random_challenge(kind, q, ell, rng), State{}};
  }
  template <class PP>
  Guess guess(const State&, const PP&, const std::vector<Ciphertext>&,
              Rng& rng) const {
    return {rng.coin(), false};
  }
};

// Submits L = R; its view is independent of b.
struct IdenticalSidesAdversary {
  struct State {};
  std::size_t q = 4;
  unsigned ell = 32;

  std::pair<ChallengePair, State> choose_challenge(Rng& rng) const {
    auto v = sample_sorted_distinct(q, ell, rng);
    return {{v, v}, State{}};
  }
  template <class PP>
  Guess guess(const State&, const PP&, const std::vector<Ciphertext>& cts,
              Rng&) const {
    return {!cts.empty() && !cts.front().bytes.empty() &&
                (cts.front().bytes.back() & 1) != 0,
            false};
  }
};

// Single-challenge adversary that reads a payload bit of the challenge
// ciphertext and ignores everything order-related.
struct PayloadBitAdversary {
  struct State {
    std::size_t pos = 0;
  };
  std::size_t q = 5;
  unsigned ell = 32;
  std::size_t byte_from_end = 20;

  std::pair<ChallengePair, State> choose_challenge(Rng& rng) const {
    ChallengePair ch = random_challenge(GameKind::kSingleChallenge, q, ell, rng);
    return {ch, State{validate_single(ch, ell)}};
  }
  template <class PP>
  Guess guess(const State& st, const PP&, const std::vector<Ciphertext>& cts,
              Rng& rng) const {
    const Bytes& c = cts[st.pos].bytes;
    if (c.size() <= byte_from_end) return {rng.coin(), true};
    return {(c[c.size() - 1 - byte_from_end] & 1) != 0, false};
  }
};

// Single-challenge adversary that decrypts the challenge with a reveal
// function derived from the public params (for escrow-mode params, which
// carry the key). A negative control: it should win almost always.
template <OreScheme S>
struct RevealingAdversary {
  struct State {
    std::size_t pos = 0;
    std::uint64_t m_left = 0;
  };
  using Reveal = std::function<std::optional<Message>(
      const typename S::PublicParams&, const Ciphertext&)>;

  Reveal reveal;
  std::size_t q = 5;
  unsigned ell = 32;

  std::pair<ChallengePair, State> choose_challenge(Rng& rng) const {
    ChallengePair ch = random_challenge(GameKind::kSingleChallenge, q, ell, rng);
    std::size_t k = validate_single(ch, ell);
    return {ch, State{k, ch.left[k]}};
  }
  Guess guess(const State& st, const typename S::PublicParams& pp,
              const std::vector<Ciphertext>& cts, Rng& rng) const {
    std::optional<Message> m = reveal(pp, cts[st.pos]);
    if (!m) return {rng.coin(), true};
    return {m->value != st.m_left, false};
  }
};

// ---------------------------------------------------------------------------
// The adversary built from a learner.

// Challenge-time bookkeeping handed to the learner alongside its sample. An
// honest learner ignores it; synthetic hypotheses use the bucket bounds to
// respond with fixed probabilities (p, q). Buckets are the open intervals
// B0 = (m_{i*-1}, m_{i*}) and B1 = (m_{i*}, m_{i*+1}).
struct ReductionContext {
  std::uint64_t b0_lo = 0, b0_hi = 0;
  std::uint64_t b1_lo = 0, b1_hi = 0;
  std::uint64_t trial_key = 0;
};

template <OreScheme S>
struct ReductionState {
  bool flagged = false;
  std::size_t i_star = 0;                 // sorted index of m'_{j*}, 1-based
  std::vector<std::uint64_t> raw;         // m'_1..m'_n
  std::vector<std::size_t> sorted_index;  // pi(j), 1-based
  ReductionContext ctx;
};

// j* is 1-based. Sample labels use the threshold t = N/2.
//
// Challenge sequences have n + 2 entries:
//   m_0, m_1, ..., m_{i*-1}, x^0, x^1, m_{i*+1}, ..., m_n
// where (x^0, x^1) is (m_L^0, m_L^1) on the left and (m_R^0, m_R^1) on the
// right. The left pair is two distinct messages from one random bucket; the
// right pair takes one message from each bucket. m_{i*} itself is never
// encrypted.
template <OreScheme S, class Learner>
class ReductionAdversary {
 public:
  using State = ReductionState<S>;

  ReductionAdversary(const S& scheme, Learner learner, std::size_t n,
                     std::size_t j_star, unsigned ell, double gamma)
      : scheme_(&scheme),
        learner_(std::move(learner)),
        n_(n),
        j_star_(j_star),
        ell_(ell),
        gamma_(gamma),
        t_(threshold_max(ell) / 2) {
    if (n == 0 || j_star < 1 || j_star > n) {
      throw UsageError("reduction adversary: j* must lie in [1, n]");
    }
  }

  // gamma^2 / (8 n^2): the advantage the proof extracts from a learner that
  // is traced to j* with probability close to one.
  double advantage_bound() const {
    return gamma_ * gamma_ / (8.0 * double(n_) * double(n_));
  }

  std::pair<ChallengePair, State> choose_challenge(Rng& rng) const {
    State st;
    const std::uint64_t top = domain_max(ell_);
    st.raw.resize(n_);
    for (auto& m : st.raw) m = rng.uniform_in(0, top);

    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return st.raw[a] < st.raw[b];
    });
    std::vector<std::uint64_t> sorted(n_ + 2);  // m_0 .. m_{n+1}
    sorted[0] = 0;
    sorted[n_ + 1] = top;
    st.sorted_index.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      sorted[i + 1] = st.raw[order[i]];
      st.sorted_index[order[i]] = i + 1;
    }
    st.i_star = st.sorted_index[j_star_ - 1];
    st.ctx.trial_key = rng();

    bool spaced = true;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      if (sorted[i + 1] <= sorted[i] + 1) spaced = false;
    }
    const std::size_t is = st.i_star;
    st.ctx.b0_lo = sorted[is - 1];
    st.ctx.b0_hi = sorted[is];
    st.ctx.b1_lo = sorted[is];
    st.ctx.b1_hi = sorted[is + 1];

    // Left pair: two distinct messages from one bucket, chosen at random.
    const bool use_b1 = rng.coin();
    const std::uint64_t lo = use_b1 ? st.ctx.b1_lo : st.ctx.b0_lo;
    const std::uint64_t hi = use_b1 ? st.ctx.b1_hi : st.ctx.b0_hi;
    if (!spaced || hi - lo < 3) {
      st.flagged = true;
      ChallengePair trivial{{0}, {0}};
      return {trivial, std::move(st)};
    }
    std::uint64_t l0 = rng.uniform_in(lo + 1, hi - 1);
    std::uint64_t l1 = l0;
    while (l1 == l0) l1 = rng.uniform_in(lo + 1, hi - 1);
    if (l1 < l0) std::swap(l0, l1);
    const std::uint64_t r0 = rng.uniform_in(st.ctx.b0_lo + 1, st.ctx.b0_hi - 1);
    const std::uint64_t r1 = rng.uniform_in(st.ctx.b1_lo + 1, st.ctx.b1_hi - 1);

    ChallengePair ch;
    for (std::size_t i = 0; i < is; ++i) {
      ch.left.push_back(sorted[i]);
      ch.right.push_back(sorted[i]);
    }
    ch.left.push_back(l0);
    ch.left.push_back(l1);
    ch.right.push_back(r0);
    ch.right.push_back(r1);
    for (std::size_t i = is + 1; i <= n_; ++i) {
      ch.left.push_back(sorted[i]);
      ch.right.push_back(sorted[i]);
    }
    return {std::move(ch), std::move(st)};
  }

  Guess guess(const State& st, const typename S::PublicParams& pp,
              const std::vector<Ciphertext>& cts, Rng& rng) const {
    if (st.flagged) return {rng.coin(), true};
    auto params = std::make_shared<const typename S::PublicParams>(pp);
    // Sequence position of sorted index i (1 <= i <= n, i != i*).
    auto position = [&](std::size_t i) { return i < st.i_star ? i : i + 1; };
    Sample<S> sample;
    sample.reserve(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (j + 1 == j_star_) {
        sample.push_back({{params, cts[0]}, true});  // junk example, label 1
      } else {
        sample.push_back({{params, cts[position(st.sorted_index[j])]},
                          st.raw[j] < t_});
      }
    }
    auto h = learner_(sample, st.ctx, rng);
    const bool y0 = h.evaluate(*scheme_, Example<S>{params, cts[st.i_star]});
    const bool y1 = h.evaluate(*scheme_, Example<S>{params, cts[st.i_star + 1]});
    return {y0 != y1, false};
  }

 private:
  const S* scheme_;
  Learner learner_;
  std::size_t n_;
  std::size_t j_star_;
  unsigned ell_;
  double gamma_;
  std::uint64_t t_;
};

template <OreScheme S, class Learner>
ReductionAdversary<S, Learner> adversary_from_learner(
    const S& scheme, Learner learner, std::size_t n, std::size_t j_star,
    unsigned ell, double gamma) {
  return ReductionAdversary<S, Learner>(scheme, std::move(learner), n, j_star,
                                        ell, gamma);
}

// Hypothesis answering 1 with probability p on B0 and q on B1 (0 elsewhere).
// Each ciphertext gets its own pseudo-random coin, so repeated evaluation is
// consistent and distinct ciphertexts are independent.
template <OreScheme S>
struct SyntheticBucketHypothesis {
  using Reveal = std::function<std::optional<Message>(
      const typename S::PublicParams&, const Ciphertext&)>;

  double p = 0, q = 0;
  ReductionContext ctx;
  Reveal reveal;

  bool evaluate(const S&, const Example<S>& x) const {
    std::optional<Message> m = reveal(*x.params, x.c);
    if (!m) return false;
    double prob = 0;
    if (m->value > ctx.b0_lo && m->value < ctx.b0_hi) prob = p;
    else if (m->value > ctx.b1_lo && m->value < ctx.b1_hi) prob = q;
    else return false;
    auto k = be64(ctx.trial_key);
    Rng coin(hash256("oretrace.synthetic.h", {k, x.c.bytes}));
    return coin.uniform01() < prob;
  }
};

template <OreScheme S>
struct SyntheticLearner {
  double p = 0, q = 0;
  typename SyntheticBucketHypothesis<S>::Reveal reveal;

  SyntheticBucketHypothesis<S> operator()(const Sample<S>&,
                                          const ReductionContext& ctx,
                                          Rng&) const {
    return {p, q, ctx, reveal};
  }
};

template <OreScheme S>
struct HonestReductionLearner {
  const S* scheme;
  Hypothesis<S> operator()(const Sample<S>& s, const ReductionContext&,
                           Rng&) const {
    return pac_learn(*scheme, s);
  }
};

template <OreScheme S>
struct ConstantZeroLearner {
  Hypothesis<S> operator()(const Sample<S>&, const ReductionContext&,
                           Rng&) const {
    return Hypothesis<S>::all_zeroes();
  }
};

}  // namespace oretrace
