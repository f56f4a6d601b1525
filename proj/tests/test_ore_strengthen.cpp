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

#include <gtest/gtest.h>

#include "oretrace/ore_opf.hpp"
#include "oretrace/ore_strengthen.hpp"

namespace oretrace {
namespace {

using Escrow = Strengthened<OpfScheme, EscrowCertifier>;
using Signed = Strengthened<OpfScheme, SignatureCertifier>;

template <class S>
class StrengthenedTest : public ::testing::Test {
 protected:
  S s;
  Rng rng = Rng::from_u64(21);
};

using Schemes = ::testing::Types<Escrow, Signed>;
TYPED_TEST_SUITE(StrengthenedTest, Schemes);

TYPED_TEST(StrengthenedTest, DecryptionRoundTrip) {
  std::vector<std::uint64_t> msgs;
  for (std::uint64_t m = 0; m < 64; ++m) msgs.push_back(m * 1021 % 65536);
  auto rep = check_decryption_correctness(this->s, 128, 16,
                                          std::span<const std::uint64_t>(msgs), 2,
                                          this->rng);
  EXPECT_TRUE(rep.passed());
}

TYPED_TEST(StrengthenedTest, StrongCorrectnessUnderFuzzing) {
  auto rep = check_strong_correctness(this->s, 128, 16, 1500, this->rng,
                                      FuzzWeights{}, 500);
  EXPECT_TRUE(rep.passed()) << rep.mismatch_count << " mismatches";
  for (std::size_t k = 0; k < kMutationClasses; ++k) {
    EXPECT_GT(rep.pairs_by_class[k], 0u) << to_string(MutationClass(k));
  }
}

TYPED_TEST(StrengthenedTest, WeakCorrectnessOnHonestPairs) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
  for (std::uint64_t a = 0; a < 16; ++a) {
    for (std::uint64_t b = 0; b < 16; ++b) pairs.push_back({a, b});
  }
  auto rep = check_weak_correctness(
      this->s, 128, 4,
      std::span<const std::pair<std::uint64_t, std::uint64_t>>(pairs), this->rng);
  EXPECT_TRUE(rep.passed());
}

TYPED_TEST(StrengthenedTest, SwappedCertificateIsRejected) {
  using S = TypeParam;
  auto km = gen(this->s, 128, 16, this->rng);
  Ciphertext a = this->s.enc(km.sk, Message::make(10, 16));
  Ciphertext b = this->s.enc(km.sk, Message::make(20, 16));
  auto pa = S::parse(a, 16);
  auto pb = S::parse(b, 16);
  ASSERT_TRUE(pa && pb);
  Ciphertext mixed = S::frame(16, pa->inner, pb->proof);
  if (pa->proof == pb->proof) {
    // Escrow certificates are empty; a well-formed c' keeps its own meaning.
    EXPECT_EQ(this->s.dec(km.sk, mixed)->value, 10u);
  } else {
    EXPECT_FALSE(this->s.dec(km.sk, mixed).has_value());
    EXPECT_EQ(this->s.comp(*km.params, mixed, a), CompareResult::kBottom);
  }
}

TYPED_TEST(StrengthenedTest, SplicedBaseCiphertextIsBottomEverywhere) {
  using S = TypeParam;
  auto km = gen(this->s, 128, 16, this->rng);
  auto e = [&](std::uint64_t m) { return this->s.enc(km.sk, Message::make(m, 16)); };
  auto hi = S::parse(e(200), 16);
  auto lo = S::parse(e(3), 16);
  Ciphertext forged =
      S::frame(16, OpfScheme::splice_fields(hi->inner, lo->inner, 16), hi->proof);
  EXPECT_EQ(this->s.comp(*km.params, forged, e(100)), CompareResult::kBottom);
  EXPECT_EQ(comp_ciph(this->s, km.sk, forged, e(100)), CompareResult::kBottom);
}

TYPED_TEST(StrengthenedTest, CiphertextFromAnotherKeyIsBottom) {
  auto k1 = gen(this->s, 128, 16, this->rng);
  auto k2 = gen(this->s, 128, 16, this->rng);
  Ciphertext foreign = this->s.enc(k2.sk, Message::make(5, 16));
  Ciphertext own = this->s.enc(k1.sk, Message::make(6, 16));
  EXPECT_EQ(this->s.comp(*k1.params, foreign, own), CompareResult::kBottom);
  EXPECT_FALSE(this->s.dec(k1.sk, foreign).has_value());
}

TYPED_TEST(StrengthenedTest, LayoutAndParams) {
  using S = TypeParam;
  auto km = gen(this->s, 128, 16, this->rng);
  Ciphertext c = this->s.enc(km.sk, Message::make(42, 16));
  ASSERT_GE(c.bytes.size(), 10u);
  EXPECT_EQ(c.bytes[0], 0x02);
  EXPECT_EQ(c.bytes[1], 16);
  EXPECT_EQ(km.params->encode()[0], 0x02);
  EXPECT_EQ(km.params->encode()[2], S::Cert::kModeByte);
  EXPECT_FALSE(S::parse(c, 17).has_value());
  Bytes trailing = c.bytes;
  trailing.push_back(0);
  EXPECT_FALSE(S::parse(Ciphertext{trailing}, 16).has_value());
}

TEST(Commitment, BindingExhaustiveSmallGrid) {
  auto rep = binding_check(1u << 12, 8);
  EXPECT_EQ(rep.commitments, (1u << 12) * 8u);
  EXPECT_TRUE(rep.passed());
  EXPECT_THROW(binding_check((1u << 16) + 1, 1), UsageError);
}

TEST(Commitment, DependsOnValueAndRandomness) {
  auto r1 = hash256("r", {as_bytes("1")});
  auto r2 = hash256("r", {as_bytes("2")});
  EXPECT_NE(commit(as_bytes("v"), r1), commit(as_bytes("v"), r2));
  EXPECT_NE(commit(as_bytes("v"), r1), commit(as_bytes("w"), r1));
  EXPECT_EQ(commit(as_bytes("v"), r1), commit(as_bytes("v"), r1));
}

TEST(EscrowReveal, RecoversPlaintextFromParamsAlone) {
  Escrow s;
  Rng rng = Rng::from_u64(5);
  auto km = gen(s, 128, 16, rng);
  Ciphertext c = s.enc(km.sk, Message::make(4321, 16));
  auto m = escrow_reveal(s, *km.params, c);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->value, 4321u);
  c.bytes.back() ^= 1;
  EXPECT_FALSE(escrow_reveal(s, *km.params, c).has_value());
}

TEST(Derandomized, EncryptionIsAFunctionOfKeyAndMessage) {
  Derandomized<OpfScheme> d;
  Rng rng = Rng::from_u64(6);
  auto km = gen(d, 128, 12, rng);
  Message m = Message::make(99, 12);
  EXPECT_EQ(d.enc(km.sk, m), d.enc(km.sk, m));
  EXPECT_EQ(d.dec(km.sk, d.enc(km.sk, m))->value, 99u);
  static_assert(DeterministicOreScheme<Derandomized<OpfScheme>>);
}

}  // namespace
}  // namespace oretrace
