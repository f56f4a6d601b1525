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

// Example reidentification for encrypted thresholds.
//
// Gen_ex fixes t = N/2, encrypts n uniform messages m'_1..m'_n and sorts them
// into m_1 <= ... <= m_n with sentinels m_0 = 0 and m_{n+1} = N - 1. Bucket i
// is [m_i, m_{i+1}). Trace_ex estimates p_i = Pr[h(Enc(m)) = 1], m uniform in
// bucket i, from K fresh encryptions each, and accuses the least i with
// p_{i-1} - p_i >= gamma / n, reported as the raw sample index j with
// m'_j = m_i.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "oretrace/common.hpp"
#include "oretrace/enc_thresh.hpp"
#include "oretrace/ore_core.hpp"

namespace oretrace {

template <OreScheme S>
struct ReidentState {
  EncThreshConcept<S> concept_;
  std::size_t n = 0;
  std::vector<std::uint64_t> raw;          // m'_1..m'_n at [0, n)
  std::vector<std::uint64_t> sorted;       // m_0..m_{n+1}
  std::vector<std::size_t> sorted_index;   // pi(j) in [1, n] for raw j
  std::vector<std::size_t> raw_index;      // inverse: raw j (1-based) for sorted i
  Sample<S> sample;                        // S, in raw order
  Example<S> junk;                         // x_0 = Enc(m_0)
  bool well_spaced = false;

  unsigned ell() const { return concept_.ell(); }
  std::uint64_t t() const { return concept_.t; }
};

struct Bucket {
  std::size_t index = 0;
  std::uint64_t lo = 0;  // inclusive
  std::uint64_t hi = 0;  // exclusive
  bool empty() const { return hi <= lo; }
};

// True when n^2 >= N / 100, i.e. collisions or adjacent draws are likely.
inline bool spacing_at_risk(std::size_t n, unsigned ell) {
  if (ell >= 40) return false;
  return double(n) * double(n) >= double(threshold_max(ell)) / 100.0;
}

template <OreScheme S>
ReidentState<S> gen_ex(const S& scheme, unsigned lambda, std::size_t n,
                       unsigned ell, Rng& rng) {
  if (n == 0) throw UsageError("gen_ex: n must be >= 1");
  ReidentState<S> st;
  st.n = n;
  st.concept_ = make_concept(scheme, lambda, ell, threshold_max(ell) / 2, rng);
  const std::uint64_t top = domain_max(ell);
  st.raw.resize(n);
  for (auto& m : st.raw) m = rng.uniform_in(0, top);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return st.raw[a] < st.raw[b];
  });
  st.sorted.assign(n + 2, 0);
  st.sorted[n + 1] = top;
  st.sorted_index.resize(n);
  st.raw_index.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    st.sorted[i + 1] = st.raw[order[i]];
    st.sorted_index[order[i]] = i + 1;
    st.raw_index[i + 1] = order[i] + 1;
  }
  st.well_spaced = true;
  for (std::size_t i = 0; i + 1 < st.sorted.size(); ++i) {
    if (st.sorted[i + 1] <= st.sorted[i] + 1) st.well_spaced = false;
  }

  st.sample.reserve(n);
  for (std::uint64_t m : st.raw) {
    st.sample.push_back(label(scheme, st.concept_,
                              encrypt_example(scheme, st.concept_, m, rng)));
  }
  st.junk = encrypt_example(scheme, st.concept_, 0, rng);
  return st;
}

// S_{-i}: position i (1-based) replaced by (x_0, 1).
template <OreScheme S>
Sample<S> sample_without(const ReidentState<S>& st, std::size_t i) {
  if (i < 1 || i > st.n) throw UsageError("sample_without: index outside [1, n]");
  Sample<S> s = st.sample;
  s[i - 1] = LabeledExample<S>{st.junk, true};
  return s;
}

template <OreScheme S>
Bucket bucket(const ReidentState<S>& st, std::size_t i) {
  return {i, st.sorted[i], st.sorted[i + 1]};
}

// K = ceil((8 n^2 / gamma^2) ln(9 n / xi)).
inline std::uint64_t estimator_k(std::size_t n, double gamma, double xi) {
  if (n == 0 || !(gamma > 0) || !(xi > 0 && xi < 1)) {
    throw UsageError("estimator_k: need n >= 1, gamma > 0, 0 < xi < 1");
  }
  const double nn = double(n);
  return static_cast<std::uint64_t>(
      std::ceil(8.0 * nn * nn / (gamma * gamma) * std::log(9.0 * nn / xi)));
}

struct BucketEstimates {
  std::vector<double> p_hat;      // p_0..p_n
  std::vector<bool> empty;        // bucket had no messages
  std::uint64_t k = 0;            // draws per bucket
  std::uint64_t k_formula = 0;    // K needed for the concentration bound
  bool reduced = false;           // k < k_formula
  bool degraded = false;          // some bucket was empty
};

// Estimates p_i for every bucket using `probe(m, rng) -> bool`. Empty buckets
// inherit the estimate of the nearest nonempty bucket below (0 if none).
template <class Probe>
BucketEstimates estimate_bucket_probs(const std::vector<std::uint64_t>& sorted,
                                      Probe&& probe, std::uint64_t k,
                                      Rng& rng) {
  if (sorted.size() < 2) throw UsageError("estimate: need at least 2 bounds");
  const std::size_t buckets = sorted.size() - 1;
  BucketEstimates est;
  est.k = k;
  est.p_hat.assign(buckets, 0.0);
  est.empty.assign(buckets, false);
  for (std::size_t i = 0; i < buckets; ++i) {
    const std::uint64_t lo = sorted[i], hi = sorted[i + 1];
    if (hi <= lo) {
      est.empty[i] = true;
      est.degraded = true;
      est.p_hat[i] = i > 0 ? est.p_hat[i - 1] : 0.0;
      continue;
    }
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < k; ++s) {
      hits += probe(rng.uniform_in(lo, hi - 1), rng) ? 1 : 0;
    }
    est.p_hat[i] = double(hits) / double(k);
  }
  return est;
}

// Least i in [1, n] with p_{i-1} - p_i >= gamma / n (sorted index).
inline std::optional<std::size_t> accuse(const std::vector<double>& p_hat,
                                         double gamma, std::size_t n) {
  const double gap = gamma / double(n);
  for (std::size_t i = 1; i < p_hat.size(); ++i) {
    if (p_hat[i - 1] - p_hat[i] >= gap) return i;
  }
  return std::nullopt;
}

struct TraceVerdict {
  std::optional<std::size_t> accused;         // raw sample index, 1-based
  std::optional<std::size_t> accused_sorted;  // bucket index i
  BucketEstimates estimates;
};

struct TraceOptions {
  double gamma = 0.45;
  double xi = 0.01;
  // Cap on K. Any cap below the full K makes the run non-conforming and
  // is reported as reduced.
  std::optional<std::uint64_t> k_cap;
};

template <OreScheme S, class H>
TraceVerdict trace_ex(const S& scheme, const ReidentState<S>& st, const H& h,
                      const TraceOptions& opt, Rng& rng) {
  const std::uint64_t k_full = estimator_k(st.n, opt.gamma, opt.xi);
  const std::uint64_t k = opt.k_cap ? std::min(k_full, *opt.k_cap) : k_full;
  auto probe = [&](std::uint64_t m, Rng& r) {
    return h.evaluate(scheme, encrypt_example(scheme, st.concept_, m, r));
  };
  TraceVerdict v;
  v.estimates = estimate_bucket_probs(st.sorted, probe, k, rng);
  v.estimates.k_formula = k_full;
  v.estimates.reduced = k < k_full;
  v.accused_sorted = accuse(v.estimates.p_hat, opt.gamma, st.n);
  if (v.accused_sorted) v.accused = st.raw_index[*v.accused_sorted];
  return v;
}

// ---------------------------------------------------------------------------
// Experiments.

struct TraceExperimentOptions {
  unsigned lambda = 128;
  unsigned ell = 32;
  std::size_t n = 50;
  double alpha = 0.05;  // a hypothesis is good when its error is <= alpha
  TraceOptions trace;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  LearnerKind learner = LearnerKind::kHonest;
};

struct TraceTrialRow {
  std::uint64_t trial = 0;
  bool well_spaced = false;
  double error = 0;
  std::optional<std::size_t> accused;
  bool good = false;
  bool good_and_untraced = false;
  bool degraded = false;
  std::uint64_t k = 0;
};

struct TraceRates {
  std::size_t trials = 0;
  std::size_t well_spaced = 0;
  std::size_t good = 0;
  std::size_t good_and_untraced = 0;
  std::size_t accused = 0;
  std::size_t accused_well_spaced = 0;
  std::size_t accused_target = 0;  // soundness: accused == dropped index
  std::size_t accused_target_well_spaced = 0;

  static double rate(std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : double(a) / double(b);
  }
};

struct TraceExperimentResult {
  std::vector<TraceTrialRow> rows;
  TraceRates rates;
  std::uint64_t k_formula = 0;
  std::uint64_t k_used = 0;
  bool reduced = false;
};

namespace detail {

template <OreScheme S>
TraceExperimentResult run_trace_experiment(
    const S& scheme, const TraceExperimentOptions& opt,
    std::optional<std::size_t> drop_index) {
  TraceExperimentResult res;
  res.k_formula = estimator_k(opt.n, opt.trace.gamma, opt.trace.xi);
  res.k_used = opt.trace.k_cap ? std::min(res.k_formula, *opt.trace.k_cap)
                               : res.k_formula;
  res.reduced = res.k_used < res.k_formula;
  for (std::size_t i = 0; i < opt.trials; ++i) {
    Rng trial = derive_trial_rng(opt.seed, i);
    Rng gen_rng = trial.fork("gen_ex");
    Rng trace_rng = trial.fork("trace_ex");
    ReidentState<S> st = gen_ex(scheme, opt.lambda, opt.n, opt.ell, gen_rng);
    const Sample<S> input =
        drop_index ? sample_without(st, *drop_index) : st.sample;
    Hypothesis<S> h = run_learner(opt.learner, scheme, input);
    TraceVerdict v = trace_ex(scheme, st, h, opt.trace, trace_rng);

    TraceTrialRow row;
    row.trial = i;
    row.well_spaced = st.well_spaced;
    row.error = uniform_error_closed_form(scheme, h, st.concept_);
    row.accused = v.accused;
    row.good = row.error <= opt.alpha;
    row.good_and_untraced = row.good && !v.accused;
    row.degraded = v.estimates.degraded;
    row.k = v.estimates.k;

    TraceRates& r = res.rates;
    ++r.trials;
    r.well_spaced += row.well_spaced;
    r.good += row.good;
    r.good_and_untraced += row.good_and_untraced;
    r.accused += v.accused.has_value();
    r.accused_well_spaced += v.accused.has_value() && row.well_spaced;
    if (drop_index && v.accused == drop_index) {
      ++r.accused_target;
      r.accused_target_well_spaced += row.well_spaced;
    }
    res.rows.push_back(row);
  }
  return res;
}

}  // namespace detail

// Learner sees S. Reports Pr[good], Pr[good and untraced], Pr[accused].
template <OreScheme S>
TraceExperimentResult completeness_experiment(const S& scheme,
                                              const TraceExperimentOptions& opt) {
  return detail::run_trace_experiment(scheme, opt, std::nullopt);
}

// Learner sees S_{-i}. Reports Pr[accused = i].
template <OreScheme S>
TraceExperimentResult soundness_experiment(const S& scheme,
                                           const TraceExperimentOptions& opt,
                                           std::size_t drop_index) {
  if (drop_index < 1 || drop_index > opt.n) {
    throw UsageError("soundness_experiment: drop index outside [1, n]");
  }
  return detail::run_trace_experiment(scheme, opt, drop_index);
}

// ---------------------------------------------------------------------------

struct DpBound {
  double delta = 0;
  bool contradiction = false;  // false when delta <= 0
};

// delta < (1 - beta - xi) / n - e^eps * xi: any (eps, delta)-DP
// (alpha, beta)-learner with delta below this contradicts the tracing scheme.
inline DpBound dp_bound(double beta, double xi, std::size_t n, double eps) {
  if (!(beta >= 0 && beta <= 1) || !(xi >= 0 && xi <= 1) || n == 0 ||
      !(eps >= 0)) {
    throw UsageError("dp_bound: need beta, xi in [0,1], n >= 1, eps >= 0");
  }
  DpBound b;
  b.delta = (1.0 - beta - xi) / double(n) - std::exp(eps) * xi;
  b.contradiction = b.delta > 0;
  return b;
}

}  // namespace oretrace
