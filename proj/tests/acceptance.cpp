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

// Acceptance run: one line per criterion, nonzero exit on any failure.
// `acceptance 3 7` runs a subset (criterion 12 then reruns only those);
// `--log file` also writes the lines there.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "oretrace/experiment.hpp"

namespace oretrace {
namespace {

struct Recorded {
  int criterion;
  ExperimentConfig cfg;
  std::string csv_body;
};

std::vector<Recorded> g_runs;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

Report run(int criterion, const Json& j) {
  ExperimentConfig c;
  apply_json(c, j);
  finalize(c);
  Report r = run_experiment(c);
  g_runs.push_back({criterion, c, r.csv_body()});
  return r;
}

std::string failed_gates(const Report& r) {
  std::string s;
  for (const Gate& g : r.gates) {
    if (!g.passed) s += (s.empty() ? "" : ",") + g.name + "(" + g.detail + ")";
  }
  return s.empty() ? "all gates" : s;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome c1() {
  Outcome o;
  for (const char* cert : {"escrow", "signature"}) {
    Report r = run(1, {{"command", "correctness"}, {"mode", "strong"},
                       {"scheme", "strengthened"}, {"certifier", cert},
                       {"ell", 16}, {"trials", 10000}, {"seed", 101}});
    std::size_t classes = 0;
    for (const auto& [k, v] : r.summary["by_class"].items()) {
      if (k != "valid" && v["pairs"].get<std::size_t>() > 0) ++classes;
    }
    o.require(r.gates_passed() && r.summary["pairs"] == 10000,
              std::string(cert) + " " + r.summary["mismatches"].dump() + "/" +
                  r.summary["pairs"].dump() + " mismatches");
    o.require(classes >= 4, std::string(cert) + " mutation classes " + std::to_string(classes));
  }
  Report w = run(1, {{"command", "correctness"}, {"mode", "witness"},
                     {"scheme", "opf"}, {"ell", 16}, {"seed", 101}});
  o.require(w.gates_passed(), "opf witness comp=" + w.summary["comp"].get<std::string>() +
                                  " comp_ciph=" + w.summary["comp_ciph"].get<std::string>());
  Report f = run(1, {{"command", "correctness"}, {"mode", "strong"}, {"scheme", "opf"},
                     {"ell", 16}, {"trials", 10000}, {"seed", 101}});
  o.require(!f.gates_passed(), "opf fuzz suite fails with " +
                                   f.summary["mismatches"].dump() + " mismatches");
  return o;
}

Outcome c2() {
  Outcome o;
  Report a = run(2, {{"command", "correctness"}, {"mode", "weak"}, {"scheme", "opf"},
                     {"ell", 6}, {"exhaustive", true}, {"seed", 102}});
  o.require(a.gates_passed() && a.summary["pairs"] == 4096,
            "ell=6 exhaustive " + a.summary["mismatches"].dump() + "/" +
                a.summary["pairs"].dump());
  Report b = run(2, {{"command", "correctness"}, {"mode", "weak"}, {"scheme", "opf"},
                     {"ell", 32}, {"trials", 100000}, {"seed", 102}});
  o.require(b.gates_passed() && b.summary["pairs"] == 100000,
            "ell=32 random " + b.summary["mismatches"].dump() + "/" +
                b.summary["pairs"].dump());
  return o;
}

Outcome c3() {
  Outcome o;
  Report r = run(3, {{"command", "pac"}, {"dist", "all"}, {"alpha", 0.05}, {"beta", 0.05},
                     {"n", 60}, {"ell", 32}, {"trials", 200}, {"seed", 103}});
  std::string rates;
  for (const auto& [k, v] : r.summary["families"].items()) {
    rates += k + "=" + num(v["rate"].get<double>()) + " ";
  }
  o.require(r.gates_passed(), rates + "one-sided violations " +
                                  r.summary["one_sided_violations"].dump());
  return o;
}

Json trace_cfg(const char* mode) {
  return {{"command", "trace"}, {"mode", mode}, {"n", 50}, {"ell", 32},
          {"gamma", 0.45}, {"xi", 0.01}, {"learner", "honest"}, {"k_cap", 1000}};
}

Outcome c4() {
  Outcome o;
  Json j = trace_cfg("completeness");
  j["trials"] = 100;
  j["seed"] = 104;
  Report r = run(4, j);
  o.require(r.gates_passed(),
            "good&untraced " + num(r.summary["good_and_untraced_rate"].get<double>()) +
                ", accused|spaced " +
                num(r.summary["accused_rate_well_spaced"].get<double>()) +
                " (K " + r.summary["k_used"].dump() + " of " +
                r.summary["k_formula"].dump() + ", reduced)");
  return o;
}

Outcome c5() {
  Outcome o;
  for (int i : {1, 25, 50}) {
    Json j = trace_cfg("soundness");
    j["trials"] = 200;
    j["drop_index"] = i;
    j["seed"] = 105;
    Report r = run(5, j);
    o.require(r.gates_passed(),
              "i=" + std::to_string(i) + " " +
                  num(r.summary["accused_target_rate"].get<double>()));
  }
  return o;
}

double enumerate_win(double p, double q) {
  auto pr = [](int y, double a) { return y ? a : 1 - a; };
  double win = 0;
  for (int b = 0; b < 2; ++b) {
    for (int y0 = 0; y0 < 2; ++y0) {
      for (int y1 = 0; y1 < 2; ++y1) {
        double w;
        if (b == 0) {
          w = 0.5 * (pr(y0, p) * pr(y1, p) + pr(y0, q) * pr(y1, q));
        } else {
          w = pr(y0, p) * pr(y1, q);
        }
        if ((y0 != y1) == (b == 1)) win += 0.5 * w;
      }
    }
  }
  return win;
}

Outcome c6() {
  Outcome o;
  double worst = 0;
  for (int i = 0; i <= 20; ++i) {
    for (int k = 0; k <= 20; ++k) {
      const double p = i * 0.05, q = k * 0.05;
      worst = std::max(worst, std::fabs(adversary_success_prob(p, q) - enumerate_win(p, q)));
    }
  }
  o.require(worst <= 1e-12, "grid max diff " + num(worst));
  for (auto [p, q] : {std::pair{1.0, 0.0}, std::pair{0.75, 0.25}, std::pair{0.5, 0.5}}) {
    Report r = run(6, {{"command", "games"}, {"mode", "static"}, {"adversary", "synthetic"},
                       {"scheme", "strengthened"}, {"certifier", "escrow"},
                       {"synthetic_p", p}, {"synthetic_q", q}, {"trials", 100000},
                       {"seed", 106}});
    o.require(r.gates_passed(), "(" + num(p) + "," + num(q) + ") " +
                                    num(r.summary["win_rate"].get<double>()) + " vs " +
                                    num(adversary_success_prob(p, q)));
  }
  return o;
}

Outcome c7() {
  Outcome o;
  Report r = run(7, {{"command", "hybrid"}, {"domain", 10}, {"q", 4}});
  o.require(r.gates_passed(), r.summary["pairs"].dump() + " pairs, " +
                                  r.summary["failures"].dump() + " failures");
  return o;
}

Outcome c8() {
  Outcome o;
  const long double l900 = 2.0L * (std::log(2.0L) + std::log(3.0L) + std::log(5.0L));
  const auto want = static_cast<std::uint64_t>(std::ceil(80000.0L * l900));
  const std::uint64_t k = estimator_k(10, 0.1, 0.1);
  o.require(k == want, "K=" + std::to_string(k) + " ceil(80000 ln 900)=" +
                           std::to_string(want) + " (stated literal 544178 disagrees)");
  Report r = run(8, {{"command", "trace"}, {"mode", "concentration"}, {"n", 10},
                     {"gamma", 0.1}, {"xi", 0.1}, {"k_cap", nullptr}, {"trials", 100},
                     {"seed", 108}});
  o.require(r.gates_passed() && r.summary["k_used"] == want,
            "within " + num(r.summary["within_rate"].get<double>()) + " at full K");
  return o;
}

Outcome c9() {
  Outcome o;
  const double got = dp_bound(0.05, 0.001, 100, 0.1).delta;
  const long double alt = 0.949L / 100.0L - (1.0L + std::expm1(0.1L)) / 1000.0L;
  o.require(std::fabs(got - double(alt)) <= 1e-12 &&
                std::fabs(got - 0.008384829081924353) <= 1e-12,
            "delta=" + fmt(got));
  return o;
}

Outcome c10() {
  Outcome o;
  Report r = run(10, {{"command", "sq"}, {"mode", "exact"}, {"ell", 16}, {"alpha", 0.05},
                      {"keyspace", "oracle"}, {"trials", 50}, {"seed", 110}});
  o.require(r.gates_passed(), r.summary["good"].dump() + "/50 good, " +
                                  r.summary["within_query_budget"].dump() +
                                  "/50 within budget");
  Report t = run(10, {{"command", "sq"}, {"mode", "exact"}, {"ell", 16}, {"alpha", 0.05},
                      {"keyspace", "tiny"}, {"trials", 1}, {"seed", 110}});
  o.require(t.gates_passed(), "tiny keyspace searched " +
                                  t.summary["exhaustive_candidates_tried"].dump());
  return o;
}

Outcome c11() {
  Outcome o;
  Report l = run(11, {{"command", "validsig"}, {"mode", "learn"}, {"dist", "all"},
                      {"alpha", 0.05}, {"beta", 0.05}, {"trials", 200},
                      {"eval_samples", 500}, {"seed", 111}});
  o.require(l.gates_passed(), "learn rates " +
                                  num(l.summary["rate_positive_heavy"].get<double>()) + "/" +
                                  num(l.summary["rate_negative_heavy"].get<double>()) + "/" +
                                  num(l.summary["rate_mixed"].get<double>()));
  Report t = run(11, {{"command", "validsig"}, {"mode", "trace"}, {"trials", 200},
                      {"seed", 111}});
  o.require(t.gates_passed(), "traced " + t.summary["traced"].dump() + "/" +
                                  t.summary["non_bot"].dump());
  Report s = run(11, {{"command", "validsig"}, {"mode", "soundness"}, {"ell", 64},
                      {"trials", 500}, {"drop_index", 1}, {"seed", 111}});
  o.require(s.gates_passed(), "soundness hits " + s.summary["accused_dropped"].dump());
  Report b = run(11, {{"command", "validsig"}, {"mode", "backend"}, {"ell", 64},
                      {"trials", 10000}, {"seed", 111}});
  o.require(b.gates_passed(), "backend " + failed_gates(b));
  Report h = run(11, {{"command", "validsig"}, {"mode", "forge"}, {"learner", "honest"},
                      {"trials", 200}, {"seed", 111}});
  Report k = run(11, {{"command", "validsig"}, {"mode", "forge"}, {"learner", "leaked"},
                      {"trials", 200}, {"seed", 111}});
  o.require(h.gates_passed() && k.gates_passed(),
            "forge honest " + h.summary["wins"].dump() + ", leaked " +
                k.summary["wins"].dump());
  return o;
}

Outcome c12(const std::set<int>& ran) {
  Outcome o;
  std::size_t same = 0, total = 0;
  const std::vector<Recorded> first = g_runs;
  for (const Recorded& r : first) {
    if (!ran.count(r.criterion)) continue;
    ++total;
    Report again = run_experiment(r.cfg);
    if (again.csv_body() == r.csv_body) {
      ++same;
    } else {
      o.require(false, "criterion " + std::to_string(r.criterion) + " " +
                           report_stem(r.cfg) + " differs");
    }
  }
  o.require(total > 0 && same == total,
            std::to_string(same) + "/" + std::to_string(total) + " reruns identical");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace oretrace

int main(int argc, char** argv) {
  using namespace oretrace;
  const std::vector<Criterion> all = {
      {1, "strong correctness", 60, c1},   {2, "weak correctness", 30, c2},
      {3, "pac bound", 600, c3},           {4, "trace completeness", 1200, c4},
      {5, "trace soundness", 1800, c5},    {6, "advantage formula", 120, c6},
      {7, "hybrid schedule", 60, c7},      {8, "estimator constant", 300, c8},
      {9, "delta bound", 1, c9},           {10, "sq learner", 300, c10},
      {11, "validsig", 600, c11},
  };
  std::set<int> pick;
  FILE* log = nullptr;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--log" && i + 1 < argc) {
      log = std::fopen(argv[++i], "w");
    } else {
      pick.insert(std::atoi(argv[i]));
    }
  }
  std::set<int> ran;
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o, double secs, double limit) {
    const bool in_time = limit <= 0 || secs < limit;
    const bool ok = o.pass && in_time;
    failures += !ok;
    for (FILE* f : {stdout, log}) {
      if (!f) continue;
      std::fprintf(f, "criterion %2d %-20s %s  %.1fs%s  %s\n", id, name,
                   ok ? "PASS" : "FAIL", secs, in_time ? "" : " (over time limit)",
                   o.detail.c_str());
      std::fflush(f);
    }
  };
  for (const Criterion& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ran.insert(c.id);
    report(c.id, c.name, o, secs, c.limit_s);
  }
  if (pick.empty() || pick.count(12)) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = c12(ran);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(12, "determinism", o, secs, 0);
  }
  if (log) std::fclose(log);
  return failures == 0 ? 0 : 1;
}
