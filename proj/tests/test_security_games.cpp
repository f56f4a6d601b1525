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

#include <cmath>

#include <gtest/gtest.h>

#include "oretrace/ore_opf.hpp"
#include "oretrace/ore_strengthen.hpp"
#include "oretrace/security_games.hpp"

namespace oretrace {
namespace {

using Escrow = Strengthened<OpfScheme, EscrowCertifier>;

// Win probability by enumerating b and the hypothesis outputs on the two
// challenge slots. On the left both slots share one bucket (chosen with
// probability 1/2 each); on the right the slots sit in B0 then B1.
double enumerate_win(double p, double q) {
  auto pr = [](bool y, double a) { return y ? a : 1 - a; };
  double win = 0;
  for (int b = 0; b < 2; ++b) {
    for (int bucket = 0; bucket < 2; ++bucket) {
      const double pb = b == 0 ? 0.5 : (bucket == 0 ? 1.0 : 0.0);
      if (pb == 0) continue;
      for (int y0 = 0; y0 < 2; ++y0) {
        for (int y1 = 0; y1 < 2; ++y1) {
          double a0, a1;
          if (b == 0) {
            a0 = a1 = bucket == 0 ? p : q;
          } else {
            a0 = p;
            a1 = q;
          }
          const double w = 0.5 * pb * pr(y0, a0) * pr(y1, a1);
          const int guess = y0 != y1;
          if (guess == b) win += w;
        }
      }
    }
  }
  return win;
}

TEST(AdvantageFormula, MatchesEnumerationOnGrid) {
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double p = i * 0.05, q = j * 0.05;
      EXPECT_NEAR(adversary_success_prob(p, q), enumerate_win(p, q), 1e-12)
          << p << "," << q;
    }
  }
  EXPECT_THROW(adversary_success_prob(1.1, 0), UsageError);
}

TEST(Challenges, StaticValidation) {
  EXPECT_NO_THROW(validate_static({{1, 2, 3}, {4, 5, 6}}, 8));
  EXPECT_THROW(validate_static({{1, 1}, {4, 5}}, 8), UsageError);
  EXPECT_THROW(validate_static({{1}, {4, 5}}, 8), UsageError);
  EXPECT_THROW(validate_static({{}, {}}, 8), UsageError);
  EXPECT_THROW(validate_static({{1, 300}, {4, 5}}, 8), UsageError);
}

TEST(Challenges, SingleValidation) {
  EXPECT_EQ(validate_single({{1, 5, 9}, {1, 6, 9}}, 8), 1u);
  EXPECT_THROW(validate_single({{1, 5, 9}, {1, 5, 9}}, 8), UsageError);
  EXPECT_THROW(validate_single({{1, 5, 9}, {2, 6, 9}}, 8), UsageError);
  EXPECT_THROW(validate_single({{1, 5, 9}, {2, 5, 9}}, 8), UsageError);  // edge
  EXPECT_THROW(validate_single({{1, 6, 9}, {1, 5, 9}}, 8), UsageError);  // m_L > m_R
}

TEST(Challenges, RandomChallengesAreValid) {
  Rng rng = Rng::from_u64(1);
  for (int i = 0; i < 300; ++i) {
    auto st = random_challenge(GameKind::kStatic, 4, 6, rng);
    EXPECT_NO_THROW(validate_static(st, 6));
    auto sc = random_challenge(GameKind::kSingleChallenge, 4, 6, rng);
    EXPECT_NO_THROW(validate_single(sc, 6));
  }
}

TEST(Hybrid, SmallCaseByHand) {
  auto h = hybrid_schedule({{1, 5}, {2, 3}});
  ASSERT_EQ(h.size(), 5u);
  EXPECT_EQ(h[0], (std::vector<std::uint64_t>{1, 5}));
  EXPECT_EQ(h[1], (std::vector<std::uint64_t>{1, 5}));
  EXPECT_EQ(h[2], (std::vector<std::uint64_t>{1, 3}));
  EXPECT_EQ(h[3], (std::vector<std::uint64_t>{1, 3}));
  EXPECT_EQ(h[4], (std::vector<std::uint64_t>{2, 3}));
}

TEST(Summary, AdvantageAndIntervalFromCounts) {
  std::vector<GameRecord> recs;
  for (int i = 0; i < 100; ++i) {
    GameRecord r;
    r.b = i % 2;
    r.guess = r.b ? (i % 4 == 1) : false;  // b=1: half ones; b=0: none
    r.win = r.guess == r.b;
    recs.push_back(r);
  }
  auto s = summarize_game(recs);
  EXPECT_EQ(s.b0_trials, 50u);
  EXPECT_EQ(s.b1_ones, 25u);
  EXPECT_DOUBLE_EQ(s.advantage, 0.5);
  const double hw = 1.96 * std::sqrt(0.25 / 50);
  EXPECT_NEAR(s.ci_lo, 0.5 - hw, 1e-12);
  EXPECT_NEAR(s.ci_hi, 0.5 + hw, 1e-12);
  EXPECT_DOUBLE_EQ(s.win_rate, 0.75);
  EXPECT_EQ(summarize_game({}).trials, 0u);
}

TEST(Games, RandomGuesserHasNoAdvantage) {
  OpfScheme s;
  GameOptions o{128, 16, 4000, 9, false};
  auto r = run_static_game(s, RandomGuesser{GameKind::kStatic, 3, 16}, o);
  EXPECT_LT(r.summary.advantage, 0.06);
}

TEST(Games, TranscriptsOnlyWhenRequested) {
  OpfScheme s;
  GameOptions o{128, 16, 3, 1, false};
  auto a = run_static_game(s, IdenticalSidesAdversary{2, 16}, o);
  EXPECT_TRUE(a.records[0].params_hex.empty());
  o.transcripts = true;
  auto b = run_static_game(s, IdenticalSidesAdversary{2, 16}, o);
  EXPECT_EQ(b.records[0].ciphertexts_hex.size(), 2u);
  EXPECT_EQ(a.records[1].b, b.records[1].b);
}

TEST(Games, RevealingAdversaryWinsAgainstEscrowParams) {
  Escrow s;
  RevealingAdversary<Escrow> adv{
      [&](const Escrow::PublicParams& pp, const Ciphertext& c) {
        return escrow_reveal(s, pp, c);
      },
      5, 16};
  auto r = run_single_challenge_game(s, adv, GameOptions{128, 16, 500, 2, false});
  EXPECT_DOUBLE_EQ(r.summary.win_rate, 1.0);
}

TEST(Reduction, ChallengesAreStaticValidWithNPlusTwoSlots) {
  Escrow s;
  auto adv = adversary_from_learner(s, ConstantZeroLearner<Escrow>{}, 8, 3, 16, 0.45);
  Rng rng = Rng::from_u64(3);
  int flagged = 0;
  for (int i = 0; i < 300; ++i) {
    auto [ch, st] = adv.choose_challenge(rng);
    if (st.flagged) {
      ++flagged;
      continue;
    }
    ASSERT_EQ(ch.left.size(), 10u);
    EXPECT_NO_THROW(validate_static(ch, 16));
    const std::size_t k = st.i_star;
    // Left pair shares a bucket; right pair straddles m_{i*}.
    const bool left_b0 = ch.left[k] > st.ctx.b0_lo && ch.left[k + 1] < st.ctx.b0_hi;
    const bool left_b1 = ch.left[k] > st.ctx.b1_lo && ch.left[k + 1] < st.ctx.b1_hi;
    EXPECT_TRUE(left_b0 || left_b1);
    EXPECT_LT(ch.right[k], st.ctx.b0_hi);
    EXPECT_GT(ch.right[k + 1], st.ctx.b1_lo);
    EXPECT_EQ(st.sorted_index[2], st.i_star);  // j* = 3
  }
  EXPECT_LT(flagged, 30);
}

TEST(Reduction, BoundFormula) {
  OpfScheme s;
  auto adv = adversary_from_learner(s, ConstantZeroLearner<OpfScheme>{}, 50, 1, 32, 0.45);
  EXPECT_DOUBLE_EQ(adv.advantage_bound(), 0.45 * 0.45 / (8.0 * 2500));
  EXPECT_THROW(adversary_from_learner(s, ConstantZeroLearner<OpfScheme>{}, 5, 6, 32, 0.45),
               UsageError);
}

TEST(Reduction, SyntheticLearnerTracksFormula) {
  Escrow s;
  auto reveal = [&](const Escrow::PublicParams& pp, const Ciphertext& c) {
    return escrow_reveal(s, pp, c);
  };
  for (auto [p, q] : {std::pair{1.0, 0.0}, std::pair{0.75, 0.25}}) {
    SyntheticLearner<Escrow> l{p, q, reveal};
    auto adv = adversary_from_learner(s, l, 4, 2, 32, 0.45);
    auto r = run_static_game(s, adv, GameOptions{128, 32, 8000, 17, false});
    EXPECT_NEAR(r.summary.win_rate, adversary_success_prob(p, q), 0.02);
  }
}

}  // namespace
}  // namespace oretrace
