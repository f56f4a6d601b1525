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

// Encrypted thresholds: f_{t,r}(params, c) = 1 iff params = params^r and
// Dec(sk^r, c) is a message below t. Thresholds range over {0, ..., N}.

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oretrace/common.hpp"
#include "oretrace/ore_core.hpp"

namespace oretrace {

template <OreScheme S>
using ParamsPtr = std::shared_ptr<const typename S::PublicParams>;

template <OreScheme S>
struct Example {
  ParamsPtr<S> params;
  Ciphertext c;
};

template <OreScheme S>
struct LabeledExample {
  Example<S> x;
  bool label = false;
};

template <OreScheme S>
using Sample = std::vector<LabeledExample<S>>;

template <OreScheme S>
bool same_params(const ParamsPtr<S>& a, const ParamsPtr<S>& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

// N = 2^ell as a threshold bound; ell = 64 saturates at 2^64 - 1.
constexpr std::uint64_t threshold_max(unsigned ell) {
  return ell >= 64 ? ~std::uint64_t{0} : std::uint64_t{1} << ell;
}

template <OreScheme S>
struct EncThreshConcept {
  std::uint64_t t = 0;
  KeyMaterial<S> km;

  unsigned ell() const { return km.sk.ell; }
  const ParamsPtr<S>& params() const { return km.params; }
};

template <OreScheme S>
EncThreshConcept<S> make_concept(const S& scheme, unsigned lambda, unsigned ell,
                                 std::uint64_t t, Rng& rng) {
  if (t > threshold_max(ell)) throw UsageError("threshold outside {0..N}");
  return {t, gen(scheme, lambda, ell, rng)};
}

template <OreScheme S>
Example<S> encrypt_example(const S& scheme, const EncThreshConcept<S>& f,
                           std::uint64_t m, Rng& rng) {
  return {f.km.params, scheme.enc(f.km.sk, Message::make(m, f.ell()), rng)};
}

template <OreScheme S>
bool evaluate_concept(const S& scheme, const EncThreshConcept<S>& f,
                      const Example<S>& x) {
  if (!same_params<S>(x.params, f.km.params)) return false;
  std::optional<Message> m = scheme.dec(f.km.sk, x.c);
  return m.has_value() && m->value < f.t;
}

template <OreScheme S>
LabeledExample<S> label(const S& scheme, const EncThreshConcept<S>& f,
                        Example<S> x) {
  bool y = evaluate_concept(scheme, f, x);
  return {std::move(x), y};
}

// ---------------------------------------------------------------------------
// Hypotheses produced by the learners.

template <OreScheme S>
struct Hypothesis {
  enum class Kind { kAllZeroes, kComparator };

  Kind kind = Kind::kAllZeroes;
  ParamsPtr<S> params;  // params* (comparator only)
  Ciphertext anchor;    // c_{j*} (comparator only)

  static Hypothesis all_zeroes() { return {}; }
  static Hypothesis comparator(ParamsPtr<S> pp, Ciphertext anchor) {
    return {Kind::kComparator, std::move(pp), std::move(anchor)};
  }

  bool evaluate(const S& scheme, const Example<S>& x) const {
    if (kind == Kind::kAllZeroes) return false;
    if (!same_params<S>(x.params, params)) return false;
    CompareResult r = scheme.comp(*params, x.c, anchor);
    return r == CompareResult::kLess || r == CompareResult::kEqual;
  }

  std::string describe() const {
    if (kind == Kind::kAllZeroes) return "all_zeroes";
    return "comparator:" + to_hex(params->encode()) + ":" + to_hex(anchor.bytes);
  }
};

// n = ceil(ln(1/beta) / alpha).
inline std::size_t required_sample_size(double alpha, double beta) {
  if (!(alpha > 0 && alpha < 1) || !(beta > 0 && beta < 1)) {
    throw UsageError("required_sample_size: alpha and beta must lie in (0,1)");
  }
  return static_cast<std::size_t>(std::ceil(std::log(1.0 / beta) / alpha));
}

// Max-positive learner. The anchor is the largest positive under comp; a comparison
// returning bottom never displaces the current anchor.
template <OreScheme S>
Hypothesis<S> pac_learn(const S& scheme, const Sample<S>& sample) {
  const LabeledExample<S>* anchor = nullptr;
  for (const LabeledExample<S>& e : sample) {
    if (!e.label) continue;
    if (anchor == nullptr) {
      anchor = &e;
      continue;
    }
    if (!same_params<S>(e.x.params, anchor->x.params)) continue;
    if (scheme.comp(*anchor->x.params, e.x.c, anchor->x.c) ==
        CompareResult::kGreater) {
      anchor = &e;
    }
  }
  if (anchor == nullptr) return Hypothesis<S>::all_zeroes();
  return Hypothesis<S>::comparator(anchor->x.params, anchor->x.c);
}

// Comparator anchored at the first positive example rather than the largest.
// Fits the sample but not the threshold; used as a tracing target.
template <OreScheme S>
Hypothesis<S> memorize_first_positive(const Sample<S>& sample) {
  for (const LabeledExample<S>& e : sample) {
    if (e.label) return Hypothesis<S>::comparator(e.x.params, e.x.c);
  }
  return Hypothesis<S>::all_zeroes();
}

enum class LearnerKind { kHonest, kAllZeroes, kMemorizeFirst };

inline const char* to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::kHonest: return "honest";
    case LearnerKind::kAllZeroes: return "all_zeroes";
    case LearnerKind::kMemorizeFirst: return "memorize_first";
  }
  return "?";
}

template <OreScheme S>
Hypothesis<S> run_learner(LearnerKind kind, const S& scheme,
                          const Sample<S>& sample) {
  switch (kind) {
    case LearnerKind::kHonest: return pac_learn(scheme, sample);
    case LearnerKind::kAllZeroes: return Hypothesis<S>::all_zeroes();
    case LearnerKind::kMemorizeFirst: return memorize_first_positive(sample);
  }
  return Hypothesis<S>::all_zeroes();
}

// ---------------------------------------------------------------------------
// Example distributions.

enum class DistFamily { kUniform, kMalformed, kWrongParams, kPointMass };

inline const char* to_string(DistFamily f) {
  switch (f) {
    case DistFamily::kUniform: return "uniform";
    case DistFamily::kMalformed: return "malformed";
    case DistFamily::kWrongParams: return "wrongparams";
    case DistFamily::kPointMass: return "pointmass";
  }
  return "?";
}

inline std::optional<DistFamily> parse_dist_family(std::string_view s) {
  if (s == "uniform") return DistFamily::kUniform;
  if (s == "malformed") return DistFamily::kMalformed;
  if (s == "wrongparams") return DistFamily::kWrongParams;
  if (s == "pointmass") return DistFamily::kPointMass;
  return std::nullopt;
}

struct DistOptions {
  double heavy_weight = 0.7;       // mass on the malformed / foreign component
  std::size_t point_count = 8;     // support size of the point-mass family
};

template <OreScheme S>
struct WeightedExample {
  Example<S> x;
  double weight;
};

// uniform:     valid encryptions of uniform messages under params^r.
// malformed:   with probability heavy_weight a fuzzed mutant (bit flip,
//              truncation or random bytes) of such an encryption.
// wrongparams: with probability heavy_weight a valid encryption under an
//              unrelated key, carrying that key's params.
// pointmass:   a fixed finite support mixing valid, malformed and foreign
//              examples with random weights.
template <OreScheme S>
class ExampleDistribution {
 public:
  static ExampleDistribution make(const S& scheme, unsigned lambda,
                                  const EncThreshConcept<S>& f,
                                  DistFamily family, Rng& rng,
                                  const DistOptions& opt = {}) {
    ExampleDistribution d(scheme, f, family, opt);
    if (family == DistFamily::kWrongParams ||
        family == DistFamily::kPointMass) {
      d.foreign_ = gen(scheme, lambda, f.ell(), rng);
    }
    if (family == DistFamily::kPointMass) {
      double total = 0;
      for (std::size_t i = 0; i < opt.point_count; ++i) {
        Example<S> x;
        switch (i % 4) {
          case 0:
          case 1: x = d.valid(rng); break;
          case 2: x = d.malformed(rng); break;
          default: x = d.foreign(rng); break;
        }
        double w = 0.05 + rng.uniform01();
        total += w;
        d.points_.push_back({std::move(x), w});
      }
      for (auto& p : d.points_) p.weight /= total;
    }
    return d;
  }

  DistFamily family() const { return family_; }

  Example<S> sample(Rng& rng) const {
    switch (family_) {
      case DistFamily::kUniform:
        return valid(rng);
      case DistFamily::kMalformed:
        return rng.bernoulli(opt_.heavy_weight) ? malformed(rng) : valid(rng);
      case DistFamily::kWrongParams:
        return rng.bernoulli(opt_.heavy_weight) ? foreign(rng) : valid(rng);
      case DistFamily::kPointMass: {
        double u = rng.uniform01();
        for (const auto& p : points_) {
          if (u < p.weight) return p.x;
          u -= p.weight;
        }
        return points_.back().x;
      }
    }
    return valid(rng);
  }

  // Finite support with weights, when the family has one that is cheap to
  // list: point-mass always, uniform for ell <= max_enum_ell.
  std::optional<std::vector<WeightedExample<S>>> support(
      unsigned max_enum_ell = 20) const {
    if (family_ == DistFamily::kPointMass) return points_;
    if (family_ == DistFamily::kUniform && f_->ell() <= max_enum_ell) {
      const std::uint64_t count = std::uint64_t{1} << f_->ell();
      std::vector<WeightedExample<S>> out;
      out.reserve(count);
      Rng unused = Rng::from_u64(0);
      for (std::uint64_t m = 0; m < count; ++m) {
        out.push_back({encrypt_example(*scheme_, *f_, m, unused),
                       1.0 / double(count)});
      }
      return out;
    }
    return std::nullopt;
  }

 private:
  ExampleDistribution(const S& scheme, const EncThreshConcept<S>& f,
                      DistFamily family, DistOptions opt)
      : scheme_(&scheme), f_(&f), family_(family), opt_(opt) {}

  Example<S> valid(Rng& rng) const {
    return encrypt_example(*scheme_, *f_, rng.uniform_in(0, domain_max(f_->ell())),
                           rng);
  }
  Example<S> malformed(Rng& rng) const {
    FuzzWeights w;
    w.w = {0.0, 1.0, 1.0, 1.0, 0.0};
    CiphertextFuzzer<S> fuzz(*scheme_, f_->km.sk, f_->ell(), w);
    return {f_->km.params, fuzz.sample(rng).c};
  }
  Example<S> foreign(Rng& rng) const {
    Message m = Message::make(rng.uniform_in(0, domain_max(f_->ell())), f_->ell());
    return {foreign_->params, scheme_->enc(foreign_->sk, m, rng)};
  }

  const S* scheme_;
  const EncThreshConcept<S>* f_;
  DistFamily family_;
  DistOptions opt_;
  std::optional<KeyMaterial<S>> foreign_;
  std::vector<WeightedExample<S>> points_;
};

// ---------------------------------------------------------------------------
// Error measurement.

struct ErrorEstimate {
  double error = 0;
  std::size_t samples = 0;
  std::size_t disagreements = 0;
  // Draws where h(x) = 1 but f(x) = 0; the max-positive learner never produces one.
  std::size_t false_positives = 0;
};

template <OreScheme S, class H>
ErrorEstimate empirical_error(const S& scheme, const H& h,
                              const EncThreshConcept<S>& f,
                              const ExampleDistribution<S>& dist,
                              std::size_t samples, Rng& rng) {
  if (samples == 0) throw UsageError("empirical_error: samples must be >= 1");
  ErrorEstimate est;
  est.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    Example<S> x = dist.sample(rng);
    bool hv = h.evaluate(scheme, x);
    bool fv = evaluate_concept(scheme, f, x);
    if (hv != fv) ++est.disagreements;
    if (hv && !fv) ++est.false_positives;
  }
  est.error = double(est.disagreements) / double(samples);
  return est;
}

// Exact error over a finite weighted support.
template <OreScheme S, class H>
ErrorEstimate exact_error(const S& scheme, const H& h,
                          const EncThreshConcept<S>& f,
                          const std::vector<WeightedExample<S>>& support) {
  ErrorEstimate est;
  est.samples = support.size();
  for (const auto& p : support) {
    bool hv = h.evaluate(scheme, p.x);
    bool fv = evaluate_concept(scheme, f, p.x);
    if (hv != fv) {
      ++est.disagreements;
      est.error += p.weight;
    }
    if (hv && !fv) ++est.false_positives;
  }
  return est;
}

// Exact error of h against f under the uniform-message distribution, computed
// from the plaintext of the anchor. Valid when comp agrees with decrypt-then-
// compare against the anchor on honest encryptions, i.e. for any scheme with
// strong comparison correctness.
template <OreScheme S>
double uniform_error_closed_form(const S& scheme, const Hypothesis<S>& h,
                                 const EncThreshConcept<S>& f) {
  const long double n_dom = static_cast<long double>(threshold_max(f.ell()));
  const long double t = static_cast<long double>(f.t);
  std::optional<Message> a;
  if (h.kind == Hypothesis<S>::Kind::kComparator &&
      same_params<S>(h.params, f.km.params)) {
    a = scheme.dec(f.km.sk, h.anchor);
  }
  if (!a) return static_cast<double>(t / n_dom);  // h is identically 0
  // h = 1 exactly on m <= a; f = 1 exactly on m < t.
  const long double hi = static_cast<long double>(a->value) + 1;
  return static_cast<double>((hi > t ? hi - t : t - hi) / n_dom);
}

}  // namespace oretrace
