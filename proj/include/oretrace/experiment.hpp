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

// Experiment configuration, dispatch and reports.
//
// A run is fully determined by its ExperimentConfig. Per-trial rows go to CSV
// (first line "# <schema>", then the header, then the body); aggregates,
// gates and timing go to JSON. Only the JSON carries wall-clock time.

#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "oretrace/common.hpp"
#include "oretrace/enc_thresh.hpp"
#include "oretrace/ore_core.hpp"
#include "oretrace/ore_opf.hpp"
#include "oretrace/ore_strengthen.hpp"
#include "oretrace/reident.hpp"
#include "oretrace/security_games.hpp"
#include "oretrace/sq_learner.hpp"
#include "oretrace/validsig.hpp"

#ifndef ORETRACE_VERSION
#define ORETRACE_VERSION "0.0.0"
#endif

namespace oretrace {

using Json = nlohmann::json;

// Invalid configuration. `path` names the offending field, e.g. "$.alpha".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> k = {
      "correctness", "pac", "trace", "games", "hybrid", "sq", "validsig"};
  return k;
}

struct ExperimentConfig {
  std::string command;
  std::string mode;  // empty selects the command's default
  unsigned lambda = 128;
  unsigned ell = 32;
  std::size_t n = 0;  // 0 derives n from alpha, beta (pac, validsig) or 50
  double alpha = 0.05;
  double beta = 0.05;
  double gamma = 0.45;
  double xi = 0.01;
  double epsilon = 0.1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::string scheme = "strengthened";  // opf | strengthened
  std::string certifier = "escrow";     // escrow | signature
  std::string dist;                     // empty selects the default family
  std::size_t drop_index = 1;
  std::optional<std::uint64_t> k_cap = 100000;  // null: the full K
  std::size_t eval_samples = 2000;
  bool exhaustive = false;
  std::size_t q = 4;
  std::size_t domain = 10;
  std::string adversary = "random";
  std::string learner = "honest";
  std::string keyspace = "oracle";
  double synthetic_p = 1.0;
  double synthetic_q = 0.0;
  bool transcripts = false;

  Json to_json() const;
  std::string canonical() const { return to_json().dump(); }
  std::string hash_hex() const {
    std::string c = canonical();
    return to_hex(hash256("oretrace.config.v1", {as_bytes(c)}));
  }
};

inline Json ExperimentConfig::to_json() const {
  Json j;
  j["command"] = command;
  j["mode"] = mode;
  j["lambda"] = lambda;
  j["ell"] = ell;
  j["n"] = n;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["gamma"] = gamma;
  j["xi"] = xi;
  j["epsilon"] = epsilon;
  j["trials"] = trials;
  j["seed"] = seed;
  j["scheme"] = scheme;
  j["certifier"] = certifier;
  j["dist"] = dist;
  j["drop_index"] = drop_index;
  j["k_cap"] = k_cap ? Json(*k_cap) : Json(nullptr);
  j["eval_samples"] = eval_samples;
  j["exhaustive"] = exhaustive;
  j["q"] = q;
  j["domain"] = domain;
  j["adversary"] = adversary;
  j["learner"] = learner;
  j["keyspace"] = keyspace;
  j["synthetic_p"] = synthetic_p;
  j["synthetic_q"] = synthetic_q;
  j["transcripts"] = transcripts;
  return j;
}

namespace detail {

inline void need(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

template <class T>
T get_uint(const Json& v, const std::string& path) {
  need(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
       path, "expected a non-negative integer");
  return static_cast<T>(v.get<std::uint64_t>());
}

inline double get_num(const Json& v, const std::string& path) {
  need(v.is_number(), path, "expected a number");
  return v.get<double>();
}

inline std::string get_str(const Json& v, const std::string& path) {
  need(v.is_string(), path, "expected a string");
  return v.get<std::string>();
}

inline bool one_of(const std::string& s, std::initializer_list<const char*> xs) {
  for (const char* x : xs) {
    if (s == x) return true;
  }
  return false;
}

}  // namespace detail

// Overlays the keys of `j` onto `cfg`. Unknown keys and type errors raise
// ConfigError naming the field.
inline void apply_json(ExperimentConfig& cfg, const Json& j) {
  using detail::get_num;
  using detail::get_str;
  using detail::get_uint;
  detail::need(j.is_object(), "$", "config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const Json& v = it.value();
    const std::string path = "$." + k;
    if (k == "command") cfg.command = get_str(v, path);
    else if (k == "mode") cfg.mode = get_str(v, path);
    else if (k == "lambda") cfg.lambda = get_uint<unsigned>(v, path);
    else if (k == "ell") cfg.ell = get_uint<unsigned>(v, path);
    else if (k == "n") cfg.n = get_uint<std::size_t>(v, path);
    else if (k == "alpha") cfg.alpha = get_num(v, path);
    else if (k == "beta") cfg.beta = get_num(v, path);
    else if (k == "gamma") cfg.gamma = get_num(v, path);
    else if (k == "xi") cfg.xi = get_num(v, path);
    else if (k == "epsilon") cfg.epsilon = get_num(v, path);
    else if (k == "trials") cfg.trials = get_uint<std::size_t>(v, path);
    else if (k == "seed") cfg.seed = get_uint<std::uint64_t>(v, path);
    else if (k == "scheme") cfg.scheme = get_str(v, path);
    else if (k == "certifier") cfg.certifier = get_str(v, path);
    else if (k == "dist") cfg.dist = get_str(v, path);
    else if (k == "drop_index") cfg.drop_index = get_uint<std::size_t>(v, path);
    else if (k == "k_cap") {
      cfg.k_cap = v.is_null() ? std::nullopt
                              : std::optional(get_uint<std::uint64_t>(v, path));
    } else if (k == "eval_samples") {
      cfg.eval_samples = get_uint<std::size_t>(v, path);
    } else if (k == "exhaustive") {
      detail::need(v.is_boolean(), path, "expected a boolean");
      cfg.exhaustive = v.get<bool>();
    } else if (k == "q") cfg.q = get_uint<std::size_t>(v, path);
    else if (k == "domain") cfg.domain = get_uint<std::size_t>(v, path);
    else if (k == "adversary") cfg.adversary = get_str(v, path);
    else if (k == "learner") cfg.learner = get_str(v, path);
    else if (k == "keyspace") cfg.keyspace = get_str(v, path);
    else if (k == "synthetic_p") cfg.synthetic_p = get_num(v, path);
    else if (k == "synthetic_q") cfg.synthetic_q = get_num(v, path);
    else if (k == "transcripts") {
      detail::need(v.is_boolean(), path, "expected a boolean");
      cfg.transcripts = v.get<bool>();
    }
    else throw ConfigError(path, "unknown key");
  }
}

inline std::string default_mode(const std::string& command) {
  if (command == "correctness") return "strong";
  if (command == "trace") return "completeness";
  if (command == "games") return "static";
  if (command == "sq") return "exact";
  if (command == "validsig") return "learn";
  return "";
}

inline std::string default_dist(const std::string& command) {
  if (command == "pac") return "uniform";
  if (command == "sq") return "uniform";
  if (command == "validsig") return "mixed";
  return "";
}

// Fills per-command defaults and checks ranges.
inline void finalize(ExperimentConfig& c) {
  using detail::need;
  using detail::one_of;
  bool known = false;
  for (const auto& k : commands()) known = known || c.command == k;
  need(known, "$.command", "unknown command '" + c.command + "'");
  if (c.mode.empty()) c.mode = default_mode(c.command);
  if (c.dist.empty()) c.dist = default_dist(c.command);

  need(c.lambda >= 64 && c.lambda <= 512, "$.lambda", "must lie in [64, 512]");
  need(c.ell >= 1 && c.ell <= kMaxEll, "$.ell", "must lie in [1, 64]");
  need(c.alpha > 0 && c.alpha < 1, "$.alpha", "must lie in (0, 1)");
  need(c.beta > 0 && c.beta < 1, "$.beta", "must lie in (0, 1)");
  need(c.gamma > 0 && c.gamma <= 0.5, "$.gamma", "must lie in (0, 0.5]");
  need(c.xi > 0 && c.xi < 1, "$.xi", "must lie in (0, 1)");
  need(c.epsilon >= 0, "$.epsilon", "must be >= 0");
  need(one_of(c.scheme, {"opf", "strengthened"}), "$.scheme",
       "expected opf | strengthened");
  need(one_of(c.certifier, {"escrow", "signature"}), "$.certifier",
       "expected escrow | signature");
  need(!c.k_cap || *c.k_cap >= 1, "$.k_cap", "must be >= 1 or null");
  need(c.synthetic_p >= 0 && c.synthetic_p <= 1, "$.synthetic_p",
       "must lie in [0, 1]");
  need(c.synthetic_q >= 0 && c.synthetic_q <= 1, "$.synthetic_q",
       "must lie in [0, 1]");

  const std::string& m = c.mode;
  if (c.command == "correctness") {
    need(one_of(m, {"decryption", "weak", "strong", "witness"}), "$.mode",
         "expected decryption | weak | strong | witness");
    need(!c.exhaustive || c.ell <= 8, "$.exhaustive", "requires ell <= 8");
    need(m != "witness" || c.ell >= 8, "$.ell", "witness needs ell >= 8");
  } else if (c.command == "pac") {
    need(m.empty(), "$.mode", "pac takes no mode");
    need(one_of(c.dist, {"uniform", "malformed", "wrongparams", "pointmass", "all"}),
         "$.dist", "expected uniform | malformed | wrongparams | pointmass | all");
    need(c.eval_samples >= 1, "$.eval_samples", "must be >= 1");
  } else if (c.command == "trace") {
    need(one_of(m, {"completeness", "soundness", "concentration"}), "$.mode",
         "expected completeness | soundness | concentration");
    need(one_of(c.learner, {"honest", "all_zeroes", "memorize_first"}),
         "$.learner", "expected honest | all_zeroes | memorize_first");
    const std::size_t n = c.n == 0 ? 50 : c.n;
    need(m != "soundness" || (c.drop_index >= 1 && c.drop_index <= n),
         "$.drop_index", "must lie in [1, n]");
    need(m == "concentration" || c.scheme == "strengthened", "$.scheme",
         "tracing error is computed for strongly correct schemes only");
  } else if (c.command == "games") {
    need(one_of(m, {"static", "single"}), "$.mode", "expected static | single");
    need(one_of(c.adversary, {"random", "identical", "payload", "reveal",
                              "reduction", "zero", "synthetic"}),
         "$.adversary",
         "expected random | identical | payload | reveal | reduction | zero | "
         "synthetic");
    const bool reduction = one_of(c.adversary, {"reduction", "zero", "synthetic"});
    need(!reduction || m == "static", "$.mode",
         "learner-based adversaries play the static game");
    need(!one_of(c.adversary, {"reveal", "synthetic"}) ||
             (c.scheme == "strengthened" && c.certifier == "escrow"),
         "$.adversary", "requires escrow-mode params");
    need(!one_of(c.adversary, {"payload", "reveal"}) || m == "single", "$.mode",
         "this adversary plays the single-challenge game");
    need(m != "single" || c.q >= 3, "$.q", "single challenge needs q >= 3");
    need(c.q >= 1, "$.q", "must be >= 1");
  } else if (c.command == "hybrid") {
    need(m.empty(), "$.mode", "hybrid takes no mode");
    need(c.domain >= 1 && c.domain <= 16, "$.domain", "must lie in [1, 16]");
    need(c.q >= 1 && c.q <= c.domain && c.q <= 6, "$.q",
         "must lie in [1, min(domain, 6)]");
  } else if (c.command == "sq") {
    need(one_of(m, {"exact", "jitter"}), "$.mode", "expected exact | jitter");
    need(one_of(c.keyspace, {"oracle", "tiny"}), "$.keyspace",
         "expected oracle | tiny");
    need(one_of(c.dist, {"uniform", "pointmass"}), "$.dist",
         "expected uniform | pointmass");
    need(c.ell <= 20, "$.ell", "sq enumerates the support; ell must be <= 20");
  } else if (c.command == "validsig") {
    need(one_of(m, {"learn", "trace", "soundness", "forge", "backend"}), "$.mode",
         "expected learn | trace | soundness | forge | backend");
    need(one_of(c.dist, {"positive_heavy", "negative_heavy", "mixed", "all"}),
         "$.dist", "expected positive_heavy | negative_heavy | mixed | all");
    need(one_of(c.learner, {"honest", "leaked"}), "$.learner",
         "expected honest | leaked");
    need(c.eval_samples >= 1, "$.eval_samples", "must be >= 1");
  }
}

inline ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  apply_json(c, j);
  return c;
}

// ---------------------------------------------------------------------------
// Reports.

struct Gate {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string command;
  std::string schema;  // CSV schema tag, e.g. "oretrace.trace.v1"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  Json summary = Json::object();
  Json transcripts;  // null unless requested
  std::vector<Gate> gates;
  double wall_clock_s = 0;

  bool gates_passed() const {
    for (const Gate& g : gates) {
      if (!g.passed) return false;
    }
    return true;
  }

  std::string csv_body() const {
    std::string out;
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += r[i];
      }
      out += '\n';
    }
    return out;
  }

  std::string csv() const {
    std::string out = "# " + schema + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out += ',';
      out += header[i];
    }
    out += '\n';
    return out + csv_body();
  }

  Json json(const ExperimentConfig& cfg) const {
    Json j;
    j["schema"] = "oretrace.report.v1";
    j["csv_schema"] = schema;
    j["command"] = command;
    j["version"] = ORETRACE_VERSION;
    j["config"] = cfg.to_json();
    j["config_hash"] = cfg.hash_hex();
    j["summary"] = summary;
    Json g = Json::array();
    for (const Gate& x : gates) {
      g.push_back({{"name", x.name}, {"passed", x.passed}, {"detail", x.detail}});
    }
    j["gates"] = g;
    j["wall_clock_s"] = wall_clock_s;
    if (!transcripts.is_null()) j["transcripts"] = transcripts;
    return j;
  }
};

inline std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(std::size_t v, int) { return std::to_string(v); }
inline std::string fmt_bool(bool b) { return b ? "1" : "0"; }
inline std::string fmt_opt(const std::optional<std::size_t>& v) {
  return v ? std::to_string(*v) : "bot";
}

inline Gate gate(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

inline double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : double(a) / double(b);
}

// ---------------------------------------------------------------------------
// Scheme selection.

using EscrowOre = Strengthened<OpfScheme, EscrowCertifier>;
using SignatureOre = Strengthened<OpfScheme, SignatureCertifier>;

template <class F>
Report with_scheme(const ExperimentConfig& c, F&& f) {
  if (c.scheme == "opf") return f(OpfScheme{});
  if (c.certifier == "signature") return f(SignatureOre{});
  return f(EscrowOre{});
}

inline std::string scheme_label(const ExperimentConfig& c) {
  return c.scheme == "opf" ? "opf" : "strengthened/" + c.certifier;
}

// ---------------------------------------------------------------------------
// correctness

template <OreScheme S>
Report run_correctness(const S& scheme, const ExperimentConfig& c) {
  Report rep;
  rep.command = "correctness";
  Rng rng = derive_trial_rng(c.seed, 0);
  rep.summary["scheme"] = scheme_label(c);
  rep.summary["mode"] = c.mode;

  if (c.mode == "decryption") {
    rep.schema = "oretrace.correctness.decryption.v1";
    rep.header = {"index", "message", "ok"};
    std::vector<std::uint64_t> msgs;
    if (c.exhaustive) {
      for (std::uint64_t m = 0; m <= domain_max(c.ell); ++m) msgs.push_back(m);
    } else {
      for (std::size_t i = 0; i < c.trials; ++i) {
        msgs.push_back(rng.uniform_in(0, domain_max(c.ell)));
      }
    }
    KeyMaterial<S> km = gen(scheme, c.lambda, c.ell, rng);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      Message m = Message::make(msgs[i], c.ell);
      auto back = scheme.dec(km.sk, scheme.enc(km.sk, m, rng));
      bool ok = back && *back == m;
      bad += !ok;
      rep.rows.push_back({fmt(std::uint64_t(i)), fmt(msgs[i]), fmt_bool(ok)});
    }
    rep.summary["checked"] = msgs.size();
    rep.summary["failures"] = bad;
    rep.gates.push_back(gate("decryption_correct", bad == 0,
                             std::to_string(bad) + " failures"));
    return rep;
  }

  if (c.mode == "weak") {
    rep.schema = "oretrace.correctness.weak.v1";
    rep.header = {"index", "m0", "m1", "comp", "expected", "agree"};
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    if (c.exhaustive) {
      for (std::uint64_t a = 0; a <= domain_max(c.ell); ++a) {
        for (std::uint64_t b = 0; b <= domain_max(c.ell); ++b) pairs.push_back({a, b});
      }
    } else {
      for (std::size_t i = 0; i < c.trials; ++i) {
        pairs.push_back({rng.uniform_in(0, domain_max(c.ell)),
                         rng.uniform_in(0, domain_max(c.ell))});
      }
    }
    std::uint64_t idx = 0;
    auto report = check_weak_correctness(
        scheme, c.lambda, c.ell, pairs, rng, 1000,
        [&](std::uint64_t m0, std::uint64_t m1, CompareResult got, Ordering3 want) {
          rep.rows.push_back({fmt(idx++), fmt(m0), fmt(m1), to_string(got),
                              to_string(want), fmt_bool(got == to_result(want))});
        });
    rep.summary["pairs"] = report.checked;
    rep.summary["mismatches"] = report.mismatch_count;
    rep.gates.push_back(gate("weak_correctness", report.passed(),
                             std::to_string(report.mismatch_count) +
                                 " mismatches over " +
                                 std::to_string(report.checked) + " pairs"));
    return rep;
  }

  rep.schema = "oretrace.correctness.strong.v1";
  rep.header = {"index", "class0", "class1", "comp", "comp_ciph", "agree"};
  if (c.mode == "strong") {
    std::uint64_t idx = 0;
    auto report = check_strong_correctness(
        scheme, c.lambda, c.ell, c.trials, rng, FuzzWeights{}, 1000,
        [&](const FuzzedCiphertext& a, const FuzzedCiphertext& b,
            StrongPairOutcome o) {
          rep.rows.push_back({fmt(idx++), to_string(a.cls), to_string(b.cls),
                              to_string(o.comp), to_string(o.comp_ciph),
                              fmt_bool(o.agree())});
        });
    rep.summary["pairs"] = report.pairs;
    rep.summary["mismatches"] = report.mismatch_count;
    Json by = Json::object();
    for (std::size_t k = 0; k < kMutationClasses; ++k) {
      by[to_string(static_cast<MutationClass>(k))] = {
          {"pairs", report.pairs_by_class[k]},
          {"mismatches", report.mismatches_by_class[k]}};
    }
    rep.summary["by_class"] = by;
    rep.summary["bottom_pairs"] = report.bottom_agreements[0];
    rep.gates.push_back(gate("strong_correctness", report.passed(),
                             std::to_string(report.mismatch_count) +
                                 " mismatches over " +
                                 std::to_string(report.pairs) + " pairs"));
    return rep;
  }

  // witness: the spliced (tag of 200, payload of 3) ciphertext against
  // Enc(100). For strengthened schemes the splice is re-framed with the
  // certificate of Enc(200).
  KeyMaterial<S> km = gen(scheme, c.lambda, c.ell, rng);
  auto e = [&](std::uint64_t m) { return scheme.enc(km.sk, Message::make(m, c.ell), rng); };
  Ciphertext forged;
  if constexpr (std::is_same_v<S, OpfScheme>) {
    forged = OpfScheme::splice_fields(e(200), e(3), c.ell);
  } else {
    auto hi = S::parse(e(200), c.ell);
    auto lo = S::parse(e(3), c.ell);
    forged = S::frame(c.ell, OpfScheme::splice_fields(hi->inner, lo->inner, c.ell),
                      hi->proof);
  }
  StrongCorrectnessReport report;
  FuzzedCiphertext a{forged, MutationClass::kSplice};
  FuzzedCiphertext b{e(100), MutationClass::kValid};
  StrongPairOutcome o = record_strong_pair(scheme, km, a, b, report);
  rep.rows.push_back({"0", to_string(a.cls), to_string(b.cls), to_string(o.comp),
                      to_string(o.comp_ciph), fmt_bool(o.agree())});
  rep.summary["comp"] = to_string(o.comp);
  rep.summary["comp_ciph"] = to_string(o.comp_ciph);
  rep.summary["violation"] = !o.agree();
  if constexpr (std::is_same_v<S, OpfScheme>) {
    rep.gates.push_back(gate("weak_scheme_fails_witness", !o.agree(),
                             std::string("comp=") + to_string(o.comp) +
                                 " comp_ciph=" + to_string(o.comp_ciph)));
  } else {
    rep.gates.push_back(gate("witness_agrees", o.agree(),
                             std::string("comp=") + to_string(o.comp) +
                                 " comp_ciph=" + to_string(o.comp_ciph)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// pac

template <OreScheme S>
Report run_pac(const S& scheme, const ExperimentConfig& c) {
  Report rep;
  rep.command = "pac";
  rep.schema = "oretrace.pac.v1";
  rep.header = {"trial", "dist", "t", "hypothesis", "positives", "error",
                "one_sided", "good"};
  const std::size_t n = c.n ? c.n : required_sample_size(c.alpha, c.beta);
  std::vector<DistFamily> families;
  if (c.dist == "all") {
    families = {DistFamily::kUniform, DistFamily::kMalformed,
                DistFamily::kWrongParams, DistFamily::kPointMass};
  } else {
    families = {*parse_dist_family(c.dist)};
  }
  Json per = Json::object();
  bool all_ok = true;
  std::size_t violations = 0;
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    const DistFamily fam = families[fi];
    std::size_t good = 0;
    for (std::size_t i = 0; i < c.trials; ++i) {
      Rng trial = derive_trial_rng(c.seed, fi * 1000003ull + i);
      const std::uint64_t t = trial.uniform_in(0, threshold_max(c.ell));
      EncThreshConcept<S> f = make_concept(scheme, c.lambda, c.ell, t, trial);
      auto dist = ExampleDistribution<S>::make(scheme, c.lambda, f, fam, trial);
      Sample<S> sample;
      std::size_t positives = 0;
      for (std::size_t k = 0; k < n; ++k) {
        sample.push_back(label(scheme, f, dist.sample(trial)));
        positives += sample.back().label;
      }
      Hypothesis<S> h = pac_learn(scheme, sample);
      ErrorEstimate err;
      if (auto sup = dist.support(0)) {
        err = exact_error(scheme, h, f, *sup);
      } else {
        err = empirical_error(scheme, h, f, dist, c.eval_samples, trial);
      }
      bool one_sided = err.false_positives == 0;
      for (const auto& e : sample) {
        if (h.evaluate(scheme, e.x) && !e.label) one_sided = false;
      }
      violations += !one_sided;
      const bool ok = err.error <= c.alpha;
      good += ok;
      rep.rows.push_back({fmt(std::uint64_t(i)), to_string(fam), fmt(t),
                          h.kind == Hypothesis<S>::Kind::kAllZeroes ? "all_zeroes"
                                                                    : "comparator",
                          fmt(std::uint64_t(positives)), fmt(err.error),
                          fmt_bool(one_sided), fmt_bool(ok)});
    }
    const double rate = ratio(good, c.trials);
    per[to_string(fam)] = {{"trials", c.trials}, {"good", good}, {"rate", rate}};
    const bool ok = c.trials == 0 || rate >= 0.90;
    all_ok = all_ok && ok;
    rep.gates.push_back(gate(std::string("pac_rate_") + to_string(fam), ok,
                             "Pr[error <= alpha] = " + fmt(rate) + " (need >= 0.90)"));
  }
  rep.summary["scheme"] = scheme_label(c);
  rep.summary["n"] = n;
  rep.summary["families"] = per;
  rep.summary["one_sided_violations"] = violations;
  rep.gates.push_back(gate("one_sided_error", violations == 0,
                           std::to_string(violations) + " violating trials"));
  return rep;
}

// ---------------------------------------------------------------------------
// trace

// Synthetic hypothesis for the estimator check: h(m) = [m < theta] or
// [m = 0 mod 3]. count_below(x) = |{m < x : h(m) = 1}| in closed form.
struct SyntheticThresholdMod3 {
  std::uint64_t theta;
  bool operator()(std::uint64_t m) const { return m < theta || m % 3 == 0; }
  static std::uint64_t mult3_below(std::uint64_t x) { return x / 3 + (x % 3 != 0); }
  std::uint64_t count_below(std::uint64_t x) const {
    if (x <= theta) return x;
    return theta + mult3_below(x) - mult3_below(theta);
  }
  double bucket_prob(std::uint64_t lo, std::uint64_t hi) const {
    if (hi <= lo) return 0;
    return double(count_below(hi) - count_below(lo)) / double(hi - lo);
  }
};

inline Report run_concentration(const ExperimentConfig& c) {
  Report rep;
  rep.command = "trace";
  rep.schema = "oretrace.trace.concentration.v1";
  rep.header = {"run", "k", "max_deviation", "tolerance", "within"};
  const std::size_t n = c.n ? c.n : 10;
  const std::uint64_t k_full = estimator_k(n, c.gamma, c.xi);
  const std::uint64_t k = c.k_cap ? std::min(k_full, *c.k_cap) : k_full;
  const double tol = c.gamma / (4.0 * double(n));
  std::size_t within = 0;
  for (std::size_t r = 0; r < c.trials; ++r) {
    Rng trial = derive_trial_rng(c.seed, r);
    std::vector<std::uint64_t> sorted(n + 2);
    sorted[0] = 0;
    sorted[n + 1] = domain_max(c.ell);
    for (std::size_t i = 1; i <= n; ++i) sorted[i] = trial.uniform_in(0, domain_max(c.ell));
    std::sort(sorted.begin() + 1, sorted.begin() + n + 1);
    SyntheticThresholdMod3 h{threshold_max(c.ell) / 2};
    auto probe = [&](std::uint64_t m, Rng&) { return h(m); };
    BucketEstimates est = estimate_bucket_probs(sorted, probe, k, trial);
    double dev = 0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      if (est.empty[i]) continue;
      dev = std::max(dev, std::fabs(est.p_hat[i] - h.bucket_prob(sorted[i], sorted[i + 1])));
    }
    const bool ok = dev <= tol;
    within += ok;
    rep.rows.push_back({fmt(std::uint64_t(r)), fmt(k), fmt(dev), fmt(tol), fmt_bool(ok)});
  }
  const double rate = ratio(within, c.trials);
  rep.summary["n"] = n;
  rep.summary["k_formula"] = k_full;
  rep.summary["k_used"] = k;
  rep.summary["reduced_k"] = k < k_full;
  rep.summary["within_rate"] = rate;
  rep.gates.push_back(gate("concentration", c.trials == 0 || rate >= 1 - c.xi / 2,
                           "within-tolerance frequency " + fmt(rate) +
                               " (need >= " + fmt(1 - c.xi / 2) + ")"));
  return rep;
}

template <OreScheme S>
Report run_trace(const S& scheme, const ExperimentConfig& c) {
  if (c.mode == "concentration") return run_concentration(c);
  Report rep;
  rep.command = "trace";
  rep.schema = "oretrace.trace.v1";
  rep.header = {"trial", "well_spaced", "error", "accused", "good_and_untraced",
                "degraded", "k"};
  TraceExperimentOptions o;
  o.lambda = c.lambda;
  o.ell = c.ell;
  o.n = c.n ? c.n : 50;
  o.alpha = 0.5 - c.gamma;
  o.trace.gamma = c.gamma;
  o.trace.xi = c.xi;
  o.trace.k_cap = c.k_cap;
  o.trials = c.trials;
  o.seed = c.seed;
  o.learner = c.learner == "all_zeroes"       ? LearnerKind::kAllZeroes
              : c.learner == "memorize_first" ? LearnerKind::kMemorizeFirst
                                              : LearnerKind::kHonest;
  const bool soundness = c.mode == "soundness";
  TraceExperimentResult res = soundness
                                  ? soundness_experiment(scheme, o, c.drop_index)
                                  : completeness_experiment(scheme, o);
  for (const TraceTrialRow& r : res.rows) {
    rep.rows.push_back({fmt(r.trial), fmt_bool(r.well_spaced), fmt(r.error),
                        fmt_opt(r.accused), fmt_bool(r.good_and_untraced),
                        fmt_bool(r.degraded), fmt(r.k)});
  }
  const TraceRates& t = res.rates;
  rep.summary["scheme"] = scheme_label(c);
  rep.summary["mode"] = c.mode;
  rep.summary["learner"] = c.learner;
  rep.summary["n"] = o.n;
  rep.summary["k_formula"] = res.k_formula;
  rep.summary["k_used"] = res.k_used;
  rep.summary["reduced_k"] = res.reduced;
  rep.summary["trials"] = t.trials;
  rep.summary["well_spaced"] = t.well_spaced;
  rep.summary["good_rate"] = ratio(t.good, t.trials);
  rep.summary["good_and_untraced_rate"] = ratio(t.good_and_untraced, t.trials);
  rep.summary["accused_rate"] = ratio(t.accused, t.trials);
  rep.summary["accused_rate_well_spaced"] = ratio(t.accused_well_spaced, t.well_spaced);
  if (soundness) {
    rep.summary["drop_index"] = c.drop_index;
    rep.summary["accused_target_rate"] = ratio(t.accused_target, t.trials);
    rep.gates.push_back(gate("soundness",
                             ratio(t.accused_target, t.trials) <= 0.02,
                             "Pr[accused = i] = " +
                                 fmt(ratio(t.accused_target, t.trials)) +
                                 " (need <= 0.02)"));
  } else {
    rep.gates.push_back(gate("good_and_untraced",
                             ratio(t.good_and_untraced, t.trials) <= 0.05,
                             "rate " + fmt(ratio(t.good_and_untraced, t.trials)) +
                                 " (need <= 0.05)"));
    rep.gates.push_back(gate("accused_well_spaced",
                             t.well_spaced == 0 ||
                                 ratio(t.accused_well_spaced, t.well_spaced) >= 0.95,
                             "rate " + fmt(ratio(t.accused_well_spaced, t.well_spaced)) +
                                 " (need >= 0.95)"));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// games

inline Report game_report(const GameResult& g, const ExperimentConfig& c) {
  Report rep;
  rep.command = "games";
  rep.schema = "oretrace.games.v1";
  rep.header = {"trial", "b", "guess", "win", "flagged"};
  for (const GameRecord& r : g.records) {
    rep.rows.push_back({fmt(r.trial), fmt_bool(r.b), fmt_bool(r.guess),
                        fmt_bool(r.win), fmt_bool(r.flagged)});
  }
  const AdvantageEstimate& s = g.summary;
  rep.summary["game"] = to_string(g.kind);
  rep.summary["adversary"] = c.adversary;
  rep.summary["scheme"] = scheme_label(c);
  rep.summary["trials"] = s.trials;
  rep.summary["advantage"] = s.advantage;
  rep.summary["ci_lo"] = s.ci_lo;
  rep.summary["ci_hi"] = s.ci_hi;
  rep.summary["win_rate"] = s.win_rate;
  rep.summary["flagged"] = s.flagged;
  if (c.transcripts) {
    Json t = Json::array();
    for (const GameRecord& r : g.records) {
      t.push_back({{"trial", r.trial}, {"b", r.b}, {"guess", r.guess},
                   {"win", r.win}, {"flagged", r.flagged},
                   {"params", r.params_hex}, {"ciphertexts", r.ciphertexts_hex}});
    }
    rep.transcripts = t;
  }
  return rep;
}

template <OreScheme S, class A>
Report play(const S& scheme, const A& adv, GameKind kind,
            const ExperimentConfig& c) {
  GameOptions o{c.lambda, c.ell, c.trials, c.seed, c.transcripts};
  return game_report(run_game(kind, scheme, adv, o), c);
}

inline bool consistent_with_zero(const AdvantageEstimate& s) {
  return s.ci_lo <= 0.0;
}

template <OreScheme S>
Report run_games(const S& scheme, const ExperimentConfig& c) {
  const GameKind kind = c.mode == "single" ? GameKind::kSingleChallenge
                                           : GameKind::kStatic;
  const std::size_t n = c.n ? c.n : 4;
  Report rep;
  auto zero_gate = [&](Report& r) {
    AdvantageEstimate s;
    s.ci_lo = r.summary["ci_lo"].get<double>();
    r.gates.push_back(gate("advantage_consistent_with_zero", s.ci_lo <= 0.0,
                           "ci_lo = " + fmt(s.ci_lo)));
  };
  if (c.adversary == "random") {
    rep = play(scheme, RandomGuesser{kind, c.q, c.ell}, kind, c);
    zero_gate(rep);
  } else if (c.adversary == "identical") {
    rep = play(scheme, IdenticalSidesAdversary{c.q, c.ell}, kind, c);
    zero_gate(rep);
  } else if (c.adversary == "payload") {
    rep = play(scheme, PayloadBitAdversary{c.q, c.ell}, kind, c);
    zero_gate(rep);
  } else if (c.adversary == "zero") {
    rep = play(scheme,
               adversary_from_learner(scheme, ConstantZeroLearner<S>{}, n,
                                      c.drop_index, c.ell, c.gamma),
               kind, c);
    zero_gate(rep);
  } else if (c.adversary == "reduction") {
    auto adv = adversary_from_learner(scheme, HonestReductionLearner<S>{&scheme},
                                      n, c.drop_index, c.ell, c.gamma);
    rep = play(scheme, adv, kind, c);
    const double bound = adv.advantage_bound();
    const double hi = rep.summary["ci_hi"].get<double>();
    rep.summary["advantage_bound"] = bound;
    rep.gates.push_back(gate("advantage_not_below_bound", hi >= bound,
                             "ci_hi = " + fmt(hi) + ", bound = " + fmt(bound)));
  } else if constexpr (std::is_same_v<S, EscrowOre>) {
    auto reveal = [&scheme](const typename S::PublicParams& pp,
                            const Ciphertext& ct) {
      return escrow_reveal(scheme, pp, ct);
    };
    if (c.adversary == "reveal") {
      RevealingAdversary<S> adv{reveal, c.q, c.ell};
      rep = play(scheme, adv, kind, c);
      const double a = rep.summary["advantage"].get<double>();
      rep.gates.push_back(gate("revealing_adversary_wins", a >= 0.9,
                               "advantage = " + fmt(a)));
    } else {
      SyntheticLearner<S> learner{c.synthetic_p, c.synthetic_q, reveal};
      rep = play(scheme,
                 adversary_from_learner(scheme, learner, n, c.drop_index, c.ell,
                                        c.gamma),
                 kind, c);
      const double want = adversary_success_prob(c.synthetic_p, c.synthetic_q);
      const double got = rep.summary["win_rate"].get<double>();
      rep.summary["predicted_win_rate"] = want;
      rep.gates.push_back(gate("win_rate_matches_formula",
                               std::fabs(got - want) <= 0.01,
                               "observed " + fmt(got) + ", predicted " + fmt(want)));
    }
  } else {
    throw ConfigError("$.adversary", "requires escrow-mode params");
  }
  rep.summary["n"] = n;
  return rep;
}

// ---------------------------------------------------------------------------
// hybrid

inline void for_each_subset(std::size_t domain, std::size_t q,
                            const std::function<void(const std::vector<std::uint64_t>&)>& f) {
  std::vector<std::uint64_t> v(q);
  std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i,
                                                             std::uint64_t from) {
    if (i == q) {
      f(v);
      return;
    }
    for (std::uint64_t x = from; x + (q - i) <= domain; ++x) {
      v[i] = x;
      rec(i + 1, x + 1);
    }
  };
  rec(0, 0);
}

inline Report run_hybrid(const ExperimentConfig& c) {
  Report rep;
  rep.command = "hybrid";
  rep.schema = "oretrace.hybrid.v1";
  rep.header = {"q", "pairs", "endpoint_failures", "ascending_failures",
                "adjacency_failures"};
  std::size_t total = 0, failures = 0;
  for (std::size_t q = 1; q <= c.q; ++q) {
    std::vector<std::vector<std::uint64_t>> subsets;
    for_each_subset(c.domain, q, [&](const auto& v) { subsets.push_back(v); });
    std::size_t pairs = 0, endpoint = 0, ascending = 0, adjacency = 0;
    for (const auto& l : subsets) {
      for (const auto& r : subsets) {
        ChallengePair ch{l, r};
        auto hs = hybrid_schedule(ch);
        ++pairs;
        endpoint += hs.front() != l || hs.back() != r;
        bool asc = true, adj = true;
        for (std::size_t j = 0; j < hs.size(); ++j) {
          asc = asc && strictly_ascending(hs[j]);
          if (j == 0) continue;
          std::size_t diff = 0;
          for (std::size_t i = 0; i < q; ++i) diff += hs[j][i] != hs[j - 1][i];
          adj = adj && diff <= 1;
        }
        ascending += !asc;
        adjacency += !adj;
      }
    }
    total += pairs;
    failures += endpoint + ascending + adjacency;
    rep.rows.push_back({fmt(std::uint64_t(q)), fmt(std::uint64_t(pairs)),
                        fmt(std::uint64_t(endpoint)), fmt(std::uint64_t(ascending)),
                        fmt(std::uint64_t(adjacency))});
  }
  rep.summary["domain"] = c.domain;
  rep.summary["max_q"] = c.q;
  rep.summary["pairs"] = total;
  rep.summary["failures"] = failures;
  rep.gates.push_back(gate("hybrid_schedule", failures == 0,
                           std::to_string(failures) + " failures over " +
                               std::to_string(total) + " pairs"));
  return rep;
}

// ---------------------------------------------------------------------------
// sq

template <OreScheme S>
Report run_sq(const S& scheme, const ExperimentConfig& c) {
  Report rep;
  rep.command = "sq";
  rep.schema = "oretrace.sq.v1";
  rep.header = {"trial", "t", "t_star", "all_zeroes", "queries", "query_bound",
                "error", "good"};
  const bool tiny = c.keyspace == "tiny";
  const OracleMode mode = c.mode == "jitter" ? OracleMode::kJitter : OracleMode::kExact;
  std::size_t good = 0, within_budget = 0;
  std::uint64_t searched = 0;
  for (std::size_t i = 0; i < c.trials; ++i) {
    Rng trial = derive_trial_rng(c.seed, i);
    const std::uint64_t t = trial.uniform_in(0, threshold_max(c.ell));
    KeyMaterial<S> km =
        tiny ? gen_tiny(scheme, c.lambda, c.ell,
                        std::uint32_t(trial.uniform_below(1u << 16)))
             : gen(scheme, c.lambda, c.ell, trial);
    EncThreshConcept<S> f{t, std::move(km)};
    auto dist = ExampleDistribution<S>::make(scheme, c.lambda, f,
                                             *parse_dist_family(c.dist), trial);
    std::vector<WeightedExample<S>> support = *dist.support();
    const std::size_t params_bytes = f.km.params->encode().size();
    const std::size_t k_bits = 8 * (params_bytes + support.front().x.c.bytes.size());
    StatOracle<S> oracle(scheme, f, support, tau_floor(k_bits, c.alpha), mode,
                         trial.fork("oracle"));
    KeyRegistry<S> registry;
    registry.add(f.km);
    ExhaustiveSearchStats ex;
    KeyRecovery<S> recover = tiny ? exhaustive_key_search(scheme, c.lambda, c.ell, 2, &ex)
                                  : registry.recovery();
    SqRunStats st;
    SqHypothesis<S> h = sq_learn(scheme, oracle, c.alpha, c.ell, params_bytes,
                                 recover, &st);
    searched += ex.candidates_tried;
    ErrorEstimate err = exact_error(scheme, h, f, support);
    const std::size_t bound = 1 + 8 * params_bytes + c.ell;
    const bool ok = err.error <= c.alpha;
    good += ok;
    within_budget += oracle.query_count() <= bound;
    rep.rows.push_back({fmt(std::uint64_t(i)), fmt(t),
                        h.all_zeroes ? "bot" : fmt(h.t), fmt_bool(h.all_zeroes),
                        fmt(std::uint64_t(oracle.query_count())),
                        fmt(std::uint64_t(bound)), fmt(err.error), fmt_bool(ok)});
  }
  rep.summary["scheme"] = scheme_label(c);
  rep.summary["mode"] = c.mode;
  rep.summary["keyspace"] = c.keyspace;
  rep.summary["trials"] = c.trials;
  rep.summary["good"] = good;
  rep.summary["within_query_budget"] = within_budget;
  rep.summary["exhaustive_candidates_tried"] = searched;
  rep.gates.push_back(gate("sq_error", good == c.trials,
                           std::to_string(good) + "/" + std::to_string(c.trials) +
                               " trials with error <= alpha"));
  rep.gates.push_back(gate("sq_query_budget", within_budget == c.trials,
                           std::to_string(within_budget) + "/" +
                               std::to_string(c.trials) + " within budget"));
  if (tiny) {
    rep.gates.push_back(gate("exhaustive_search_ran", c.trials == 0 || searched > 0,
                             std::to_string(searched) + " candidates tried"));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// validsig

inline Report run_validsig(const ExperimentConfig& c) {
  const Ed25519 sig;
  Report rep;
  rep.command = "validsig";
  rep.summary["mode"] = c.mode;
  const std::size_t n = c.n ? c.n : required_sample_size(c.alpha, c.beta);
  rep.summary["n"] = n;

  if (c.mode == "learn") {
    rep.schema = "oretrace.validsig.learn.v1";
    rep.header = {"trial", "dist", "positives", "bot", "error", "good"};
    std::vector<SigDistFamily> fams;
    if (c.dist == "all" || c.dist == "positive_heavy") fams.push_back(SigDistFamily::kPositiveHeavy);
    if (c.dist == "all" || c.dist == "negative_heavy") fams.push_back(SigDistFamily::kNegativeHeavy);
    if (c.dist == "all" || c.dist == "mixed") fams.push_back(SigDistFamily::kMixed);
    for (std::size_t fi = 0; fi < fams.size(); ++fi) {
      std::size_t good = 0;
      for (std::size_t i = 0; i < c.trials; ++i) {
        Rng trial = derive_trial_rng(c.seed, fi * 1000003ull + i);
        auto target = sig.gen(trial);
        auto foreign = sig.gen(trial);
        Bytes m = random_message(c.ell, trial);
        ValidSigConcept<Ed25519> f{target.vk, m, sig.sign(target.sk, m, trial), c.ell};
        TripleDistribution<Ed25519> dist(sig, target, foreign, c.ell,
                                         TripleDistribution<Ed25519>::positive_weight(fams[fi]));
        std::vector<LabeledTriple> sample;
        std::size_t positives = 0;
        for (std::size_t k = 0; k < n; ++k) {
          SigTriple x = dist.sample(trial);
          const bool y = evaluate_validsig(sig, f, x);
          positives += y;
          sample.push_back({std::move(x), y});
        }
        Representation r = validsig_learn(sample);
        ErrorEstimate err = validsig_error(sig, r, f, dist, c.eval_samples, trial);
        const bool ok = err.error <= c.alpha;
        good += ok;
        rep.rows.push_back({fmt(std::uint64_t(i)), to_string(fams[fi]),
                            fmt(std::uint64_t(positives)), fmt_bool(!r),
                            fmt(err.error), fmt_bool(ok)});
      }
      const double rate = ratio(good, c.trials);
      rep.summary[std::string("rate_") + to_string(fams[fi])] = rate;
      rep.gates.push_back(gate(std::string("validsig_rate_") + to_string(fams[fi]),
                               c.trials == 0 || rate >= 0.90,
                               "rate " + fmt(rate) + " (need >= 0.90)"));
    }
    return rep;
  }

  if (c.mode == "trace" || c.mode == "soundness") {
    const bool sound = c.mode == "soundness";
    rep.schema = "oretrace.validsig.trace.v1";
    rep.header = {"trial", "bot", "accused"};
    std::size_t traced = 0, non_bot = 0, hit = 0;
    for (std::size_t i = 0; i < c.trials; ++i) {
      Rng trial = derive_trial_rng(c.seed, i);
      ValidSigState<Ed25519> st = validsig_gen_ex(sig, n, c.ell, trial);
      Representation r = validsig_learn(sound ? st.sample_without(c.drop_index)
                                              : st.sample());
      std::optional<std::size_t> a = validsig_trace_ex(st, r);
      non_bot += r.has_value();
      traced += r.has_value() && a.has_value();
      hit += a == std::optional<std::size_t>(c.drop_index);
      rep.rows.push_back({fmt(std::uint64_t(i)), fmt_bool(!r), fmt_opt(a)});
    }
    rep.summary["non_bot"] = non_bot;
    rep.summary["traced"] = traced;
    if (sound) {
      rep.summary["drop_index"] = c.drop_index;
      rep.summary["accused_dropped"] = hit;
      rep.gates.push_back(gate("validsig_soundness", hit == 0,
                               std::to_string(hit) + " accusations of the dropped index"));
    } else {
      rep.gates.push_back(gate("validsig_completeness", traced == non_bot,
                               std::to_string(traced) + "/" + std::to_string(non_bot) +
                                   " non-bot representations traced"));
    }
    return rep;
  }

  if (c.mode == "forge") {
    rep.schema = "oretrace.validsig.forge.v1";
    rep.header = {"trial", "attempted", "valid", "fresh", "win"};
    std::size_t wins = 0;
    const bool leaked = c.learner == "leaked";
    for (std::size_t i = 0; i < c.trials; ++i) {
      Rng trial = derive_trial_rng(c.seed, i);
      auto kp = sig.gen(trial);
      SigningOracle<Ed25519> oracle(sig, kp.sk);
      // The leaked-key learner signs a fresh message itself.
      auto learner = [&](const std::vector<LabeledTriple>& s, Rng& r) -> Representation {
        if (!leaked) return validsig_learn(s);
        Bytes m = random_message(c.ell, r);
        return SigTriple{kp.vk, m, sig.sign(kp.sk, m, r)};
      };
      ForgeryAttempt a = forgery_adversary(sig, learner, n, c.ell, oracle, kp.vk, trial);
      wins += a.win();
      rep.rows.push_back({fmt(std::uint64_t(i)), fmt_bool(a.forgery.has_value()),
                          fmt_bool(a.valid), fmt_bool(a.fresh), fmt_bool(a.win())});
    }
    rep.summary["learner"] = c.learner;
    rep.summary["wins"] = wins;
    rep.gates.push_back(leaked ? gate("leaked_key_forges", wins == c.trials,
                                      std::to_string(wins) + " wins")
                               : gate("honest_learner_never_forges", wins == 0,
                                      std::to_string(wins) + " wins"));
    return rep;
  }

  rep.schema = "oretrace.validsig.backend.v1";
  rep.header = {"check", "count", "failures"};
  Rng rng = derive_trial_rng(c.seed, 0);
  SignatureCheckReport r = check_signature_backend(sig, c.ell, c.trials, rng);
  rep.rows.push_back({"round_trip", fmt(std::uint64_t(r.round_trips)),
                      fmt(std::uint64_t(r.round_trip_failures))});
  rep.rows.push_back({"bit_flip_rejected", fmt(std::uint64_t(r.flips)),
                      fmt(std::uint64_t(r.flips_accepted))});
  rep.rows.push_back({"malleation_rejected", fmt(std::uint64_t(r.malleations)),
                      fmt(std::uint64_t(r.malleations_accepted))});
  rep.gates.push_back(gate("signature_backend", r.passed(),
                           std::to_string(r.round_trip_failures + r.flips_accepted +
                                          r.malleations_accepted) +
                               " failures"));
  return rep;
}

// ---------------------------------------------------------------------------
// Dispatch and output.

// Runs a finalized config.
inline Report run_experiment(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  if (c.command == "hybrid") {
    rep = run_hybrid(c);
  } else if (c.command == "validsig") {
    rep = run_validsig(c);
  } else if (c.command == "trace" && c.mode == "concentration") {
    rep = run_concentration(c);
  } else {
    rep = with_scheme(c, [&](const auto& scheme) -> Report {
      if (c.command == "correctness") return run_correctness(scheme, c);
      if (c.command == "pac") return run_pac(scheme, c);
      if (c.command == "trace") return run_trace(scheme, c);
      if (c.command == "games") return run_games(scheme, c);
      return run_sq(scheme, c);
    });
  }
  rep.command = c.command;
  rep.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline std::string report_stem(const ExperimentConfig& c) {
  return c.mode.empty() ? c.command : c.command + "-" + c.mode;
}

// Writes <out>/<stem>.csv and/or <out>/<stem>.json. Returns the paths written.
inline std::vector<std::string> write_report(const Report& rep,
                                             const ExperimentConfig& c,
                                             const std::string& out_dir,
                                             const std::string& format) {
  std::vector<std::string> paths;
  const std::string stem = out_dir + "/" + report_stem(c);
  auto put = [&](const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << body;
    paths.push_back(path);
  };
  if (format == "csv" || format == "both") put(stem + ".csv", rep.csv());
  if (format == "json" || format == "both") put(stem + ".json", rep.json(c).dump(2) + "\n");
  return paths;
}

}  // namespace oretrace
