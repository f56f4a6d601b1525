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
#include "oretrace/sq_learner.hpp"

namespace oretrace {
namespace {

TEST(TauFloor, Formula) {
  EXPECT_DOUBLE_EQ(tau_floor(100, 0.05), 1.0 / (64.0 * 100 * 20));
  EXPECT_DOUBLE_EQ(tau_floor(8, 0.3), 1.0 / (64.0 * 8 * 4));
  EXPECT_THROW(tau_floor(0, 0.1), UsageError);
  EXPECT_THROW(tau_floor(8, 1.0), UsageError);
}

struct Fixture {
  OpfScheme s;
  EncThreshConcept<OpfScheme> f;
  std::vector<WeightedExample<OpfScheme>> support;

  Fixture(unsigned ell, std::uint64_t t, std::uint64_t seed) {
    Rng rng = Rng::from_u64(seed);
    f = make_concept(s, 128, ell, t, rng);
    auto d = ExampleDistribution<OpfScheme>::make(s, 128, f, DistFamily::kUniform, rng);
    support = *d.support();
  }
};

TEST(StatOracle, ExactExpectationAndFloor) {
  Fixture fx(8, 100, 1);
  StatOracle<OpfScheme> o(fx.s, fx.f, fx.support, 0.01, OracleMode::kExact,
                          Rng::from_u64(2));
  EXPECT_DOUBLE_EQ(o.query([](const auto&, bool b) { return b; }, 0.01), 100.0 / 256);
  EXPECT_THROW(o.query([](const auto&, bool) { return true; }, 0.001), UsageError);
  EXPECT_EQ(o.query_count(), 1u);
}

TEST(StatOracle, JitterStaysWithinTolerance) {
  Fixture fx(8, 77, 3);
  StatOracle<OpfScheme> o(fx.s, fx.f, fx.support, 0.01, OracleMode::kJitter,
                          Rng::from_u64(4));
  for (int i = 0; i < 200; ++i) {
    EXPECT_LE(std::fabs(o.query([](const auto&, bool b) { return b; }, 0.02) - 77.0 / 256),
              0.02);
  }
}

class SqSweep : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SqSweep, ErrorMatchesThresholdDistance) {
  const unsigned ell = 10;
  const double alpha = 0.05;
  const std::uint64_t t = GetParam();
  Fixture fx(ell, t, 100 + t);
  const std::size_t pp_bytes = fx.f.km.params->encode().size();
  const std::size_t k_bits = 8 * (pp_bytes + fx.support.front().x.c.bytes.size());
  for (auto mode : {OracleMode::kExact, OracleMode::kJitter}) {
    StatOracle<OpfScheme> o(fx.s, fx.f, fx.support, tau_floor(k_bits, alpha), mode,
                            Rng::from_u64(t));
    KeyRegistry<OpfScheme> reg;
    reg.add(fx.f.km);
    SqRunStats st;
    auto h = sq_learn(fx.s, o, alpha, ell, pp_bytes, reg.recovery(), &st);
    auto err = exact_error(fx.s, h, fx.f, fx.support);
    // both concepts are thresholds on the same key: they disagree on
    // exactly |t_hat - t| messages
    const double t_hat = h.all_zeroes ? 0.0 : double(h.t);
    EXPECT_NEAR(err.error, std::fabs(t_hat - double(t)) / 1024.0, 1e-12);
    EXPECT_LE(err.error, alpha) << to_string(mode);
    EXPECT_EQ(err.false_positives == 0, h.all_zeroes || h.t <= t || err.error == 0);
    EXPECT_LE(st.queries, 1 + 8 * pp_bytes + ell);
    EXPECT_EQ(st.queries, o.query_count());
  }
}

INSTANTIATE_TEST_SUITE_P(Thresholds, SqSweep,
                         ::testing::Values(0, 1, 20, 26, 300, 512, 777, 1023, 1024));

TEST(SqLearner, AllZeroesWhenNoPositiveMass) {
  Fixture fx(10, 0, 9);
  StatOracle<OpfScheme> o(fx.s, fx.f, fx.support, 1e-4, OracleMode::kExact,
                          Rng::from_u64(1));
  KeyRegistry<OpfScheme> reg;
  SqRunStats st;
  auto h = sq_learn(fx.s, o, 0.05, 10, fx.f.km.params->encode().size(),
                    reg.recovery(), &st);
  EXPECT_TRUE(h.all_zeroes);
  EXPECT_EQ(st.queries, 1u);
}

TEST(SqLearner, MissingKeyThrows) {
  Fixture fx(10, 600, 10);
  StatOracle<OpfScheme> o(fx.s, fx.f, fx.support, 1e-4, OracleMode::kExact,
                          Rng::from_u64(1));
  KeyRegistry<OpfScheme> empty;
  EXPECT_THROW(sq_learn(fx.s, o, 0.05, 10, fx.f.km.params->encode().size(),
                        empty.recovery()),
               KeyRecoveryFailed);
}

TEST(TinyKeyspace, ExhaustiveSearchRecoversEquivalentKey) {
  OpfScheme s;
  KeyMaterial<OpfScheme> km = gen_tiny(s, 128, 8, 4242);
  ExhaustiveSearchStats ex;
  auto search = exhaustive_key_search(s, 128, 8, 2, &ex);
  auto sk = search(km.params->encode());
  ASSERT_TRUE(sk.has_value());
  EXPECT_GE(ex.candidates_tried, 1u);
  EXPECT_LE(ex.candidates_tried, 4243u);
  Rng rng = Rng::from_u64(11);
  auto rep = check_key_equivalence(s, km.sk, *sk, 8, 300, rng);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.checked, 2u * (256 + 300));
  EXPECT_THROW(exhaustive_key_search(s, 128, 8, 3), UsageError);
}

TEST(TinyKeyspace, EquivalenceCheckCatchesDifferentKeys) {
  OpfScheme s;
  auto a = gen_tiny(s, 128, 6, 1);
  auto b = gen_tiny(s, 128, 6, 2);
  Rng rng = Rng::from_u64(12);
  EXPECT_FALSE(check_key_equivalence(s, a.sk, b.sk, 6, 10, rng).passed());
  EXPECT_THROW(check_key_equivalence(s, a.sk, b.sk, 13, 0, rng), UsageError);
}

TEST(TinyKeyspace, StrengthenedSchemeEndToEnd) {
  using Escrow = Strengthened<OpfScheme, EscrowCertifier>;
  Escrow s;
  auto km = gen_tiny(s, 128, 8, 777);
  EncThreshConcept<Escrow> f{100, km};
  Rng rng = Rng::from_u64(13);
  auto d = ExampleDistribution<Escrow>::make(s, 128, f, DistFamily::kUniform, rng);
  auto support = *d.support();
  const std::size_t pp = f.km.params->encode().size();
  StatOracle<Escrow> o(s, f, support, 1e-5, OracleMode::kExact, Rng::from_u64(1));
  auto h = sq_learn(s, o, 0.05, 8, pp, exhaustive_key_search(s, 128, 8));
  EXPECT_LE(exact_error(s, h, f, support).error, 0.05);
}

}  // namespace
}  // namespace oretrace
