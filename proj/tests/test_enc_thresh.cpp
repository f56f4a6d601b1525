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

#include "oretrace/enc_thresh.hpp"
#include "oretrace/ore_opf.hpp"
#include "oretrace/ore_strengthen.hpp"

namespace oretrace {
namespace {

using Escrow = Strengthened<OpfScheme, EscrowCertifier>;

class EncThreshTest : public ::testing::Test {
 protected:
  Escrow s;
  Rng rng = Rng::from_u64(31);

  LabeledExample<Escrow> ex(const EncThreshConcept<Escrow>& f, std::uint64_t m) {
    return label(s, f, encrypt_example(s, f, m, rng));
  }
};

TEST(SampleSize, MatchesLogFormula) {
  EXPECT_EQ(required_sample_size(0.05, 0.05), 60u);  // ln 20 / 0.05 = 59.9
  EXPECT_EQ(required_sample_size(0.1, 0.01), 47u);   // ln 100 / 0.1 = 46.05
  EXPECT_EQ(required_sample_size(0.5, 0.5), 2u);
  EXPECT_THROW(required_sample_size(0, 0.5), UsageError);
}

TEST_F(EncThreshTest, ConceptLabelsStrictlyBelowThreshold) {
  auto f = make_concept(s, 128, 8, 100, rng);
  EXPECT_TRUE(ex(f, 99).label);
  EXPECT_FALSE(ex(f, 100).label);
  EXPECT_FALSE(ex(f, 255).label);
  auto g = make_concept(s, 128, 8, 256, rng);
  EXPECT_TRUE(ex(g, 255).label);
  EXPECT_THROW(make_concept(s, 128, 8, 257, rng), UsageError);
}

TEST_F(EncThreshTest, LearnerAnchorsOnLargestPositive) {
  auto f = make_concept(s, 128, 8, 100, rng);
  Sample<Escrow> sample = {ex(f, 10), ex(f, 150), ex(f, 97), ex(f, 40), ex(f, 99 + 100)};
  auto h = pac_learn(s, sample);
  ASSERT_EQ(h.kind, Hypothesis<Escrow>::Kind::kComparator);
  EXPECT_EQ(s.dec(f.km.sk, h.anchor)->value, 97u);
  for (std::uint64_t m = 0; m < 256; ++m) {
    EXPECT_EQ(h.evaluate(s, encrypt_example(s, f, m, rng)), m <= 97) << m;
  }
}

TEST_F(EncThreshTest, AllNegativeSampleGivesAllZeroes) {
  auto f = make_concept(s, 128, 8, 10, rng);
  Sample<Escrow> sample = {ex(f, 10), ex(f, 200)};
  EXPECT_EQ(pac_learn(s, sample).kind, Hypothesis<Escrow>::Kind::kAllZeroes);
  EXPECT_EQ(memorize_first_positive(sample).kind, Hypothesis<Escrow>::Kind::kAllZeroes);
}

TEST_F(EncThreshTest, BottomComparisonNeverReplacesAnchor) {
  auto f = make_concept(s, 128, 8, 200, rng);
  auto first = ex(f, 50);
  // A positive-labelled example whose ciphertext fails the certificate.
  LabeledExample<Escrow> broken{{f.km.params, Ciphertext{Bytes{0x02, 8, 0}}}, true};
  Sample<Escrow> sample = {first, broken, ex(f, 20)};
  auto h = pac_learn(s, sample);
  EXPECT_EQ(h.anchor, first.x.c);
}

TEST_F(EncThreshTest, OneSidedErrorOnRandomSamples) {
  for (int trial = 0; trial < 20; ++trial) {
    auto f = make_concept(s, 128, 10, rng.uniform_in(0, 1024), rng);
    Sample<Escrow> sample;
    for (int i = 0; i < 30; ++i) sample.push_back(ex(f, rng.uniform_in(0, 1023)));
    auto h = pac_learn(s, sample);
    for (std::uint64_t m = 0; m < 1024; m += 7) {
      auto x = encrypt_example(s, f, m, rng);
      if (h.evaluate(s, x)) EXPECT_TRUE(evaluate_concept(s, f, x)) << m;
    }
  }
}

// Closed form against plain enumeration of the message domain.
TEST_F(EncThreshTest, ClosedFormErrorMatchesEnumeration) {
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t t = rng.uniform_in(0, 256);
    auto f = make_concept(s, 128, 8, t, rng);
    Sample<Escrow> sample;
    for (int i = 0; i < 6; ++i) sample.push_back(ex(f, rng.uniform_in(0, 255)));
    auto h = pac_learn(s, sample);
    int wrong = 0;
    for (std::uint64_t m = 0; m < 256; ++m) {
      auto x = encrypt_example(s, f, m, rng);
      wrong += h.evaluate(s, x) != (m < t);
    }
    EXPECT_NEAR(uniform_error_closed_form(s, h, f), wrong / 256.0, 1e-15);
  }
}

TEST_F(EncThreshTest, SupportsAreDistributions) {
  auto f = make_concept(s, 128, 6, 30, rng);
  for (DistFamily fam : {DistFamily::kUniform, DistFamily::kPointMass}) {
    auto d = ExampleDistribution<Escrow>::make(s, 128, f, fam, rng);
    auto sup = d.support();
    ASSERT_TRUE(sup.has_value());
    double total = 0;
    for (const auto& p : *sup) total += p.weight;
    EXPECT_NEAR(total, 1.0, 1e-12) << to_string(fam);
  }
  auto m = ExampleDistribution<Escrow>::make(s, 128, f, DistFamily::kMalformed, rng);
  EXPECT_FALSE(m.support().has_value());
}

TEST_F(EncThreshTest, HeavyFamiliesCarryTheirMass) {
  auto f = make_concept(s, 128, 16, 30000, rng);
  auto bad = ExampleDistribution<Escrow>::make(s, 128, f, DistFamily::kMalformed, rng);
  auto wrong = ExampleDistribution<Escrow>::make(s, 128, f, DistFamily::kWrongParams, rng);
  int malformed = 0, foreign = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    auto x = bad.sample(rng);
    malformed += !s.dec(f.km.sk, x.c).has_value();
    foreign += !same_params<Escrow>(wrong.sample(rng).params, f.km.params);
  }
  EXPECT_NEAR(malformed / double(n), 0.7, 0.04);
  EXPECT_NEAR(foreign / double(n), 0.7, 0.04);
}

TEST_F(EncThreshTest, ExactAndEmpiricalErrorAgree) {
  auto f = make_concept(s, 128, 8, 128, rng);
  auto d = ExampleDistribution<Escrow>::make(s, 128, f, DistFamily::kPointMass, rng);
  Sample<Escrow> sample;
  for (int i = 0; i < 5; ++i) sample.push_back(label(s, f, d.sample(rng)));
  auto h = memorize_first_positive(sample);
  auto exact = exact_error(s, h, f, *d.support());
  auto emp = empirical_error(s, h, f, d, 20000, rng);
  EXPECT_NEAR(exact.error, emp.error, 0.015);
}

}  // namespace
}  // namespace oretrace
