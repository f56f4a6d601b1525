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

// oretrace: run one experiment and write its report.
//
//   oretrace trace --mode soundness --drop-index 25 --trials 200 --gate
//   oretrace pac --config pac.json --seed 7 --out runs/ --format csv
//
// Settings are layered: built-in defaults, then --config, then flags.
// Exit codes: 0 success, 2 config error, 3 gate failure (with --gate).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oretrace/experiment.hpp"

namespace {

using oretrace::ExperimentConfig;
using oretrace::Json;

constexpr int kExitConfig = 2;
constexpr int kExitGate = 3;

// Every flag is bound to a JSON value so it can be overlaid with the same
// strict parser used for config files.
struct Flags {
  std::string config_path;
  std::string out = ".";
  std::string format = "both";
  bool gate = false;
  bool transcripts = false;
  bool quiet = false;

  std::map<std::string, std::string> raw;  // key -> text as given
  std::map<std::string, CLI::Option*> opts;
  std::map<std::string, char> kinds;       // 'u' unsigned, 'd' double, 's' string, 'b' bool
};

void add_value(CLI::App* app, Flags& f, const std::string& key, char kind,
               const std::string& help) {
  std::string flag = "--" + key;
  for (char& ch : flag) {
    if (ch == '_') ch = '-';
  }
  f.kinds[key] = kind;
  if (kind == 'b') {
    f.opts[key] = app->add_flag(flag, help);
  } else {
    f.opts[key] = app->add_option(flag, f.raw[key], help);
  }
}

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_path, "JSON config file")
      ->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "output directory");
  app->add_option("--format", f.format, "report format")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  app->add_flag("--gate", f.gate, "exit 3 when an acceptance gate fails");
  app->add_flag("--transcripts", f.transcripts, "include game transcripts");
  app->add_flag("--quiet", f.quiet, "print nothing on success");

  add_value(app, f, "seed", 'u', "master seed");
  add_value(app, f, "trials", 'u', "number of trials");
  add_value(app, f, "mode", 's', "command mode");
  add_value(app, f, "lambda", 'u', "security parameter");
  add_value(app, f, "ell", 'u', "message length in bits");
  add_value(app, f, "n", 'u', "sample size (0 derives it)");
  add_value(app, f, "alpha", 'd', "accuracy");
  add_value(app, f, "beta", 'd', "confidence");
  add_value(app, f, "gamma", 'd', "tracing margin");
  add_value(app, f, "xi", 'd', "tracing failure probability");
  add_value(app, f, "epsilon", 'd', "privacy parameter");
  add_value(app, f, "scheme", 's', "opf | strengthened");
  add_value(app, f, "certifier", 's', "escrow | signature");
  add_value(app, f, "dist", 's', "example distribution family");
  add_value(app, f, "drop_index", 'u', "sample index withheld (1-based)");
  add_value(app, f, "k_cap", 's', "cap on estimator draws, or 'none'");
  add_value(app, f, "eval_samples", 'u', "draws for empirical error");
  add_value(app, f, "exhaustive", 'b', "enumerate the whole domain");
  add_value(app, f, "q", 'u', "challenge length");
  add_value(app, f, "domain", 'u', "hybrid check domain size");
  add_value(app, f, "adversary", 's', "game adversary");
  add_value(app, f, "learner", 's', "learner under test");
  add_value(app, f, "keyspace", 's', "oracle | tiny");
  add_value(app, f, "synthetic_p", 'd', "synthetic hypothesis p");
  add_value(app, f, "synthetic_q", 'd', "synthetic hypothesis q");
}

Json flags_json(const Flags& f) {
  Json j = Json::object();
  for (const auto& [key, opt] : f.opts) {
    if (opt->count() == 0) continue;
    const std::string path = "--" + key;
    const char kind = f.kinds.at(key);
    if (kind == 'b') {
      j[key] = true;
      continue;
    }
    const std::string& text = f.raw.at(key);
    try {
      if (key == "k_cap" && (text == "none" || text == "null")) {
        j[key] = nullptr;
      } else if (kind == 'u' || key == "k_cap") {
        std::size_t pos = 0;
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        j[key] = static_cast<std::uint64_t>(std::stoull(text, &pos));
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
      } else if (kind == 'd') {
        std::size_t pos = 0;
        j[key] = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
      } else {
        j[key] = text;
      }
    } catch (const std::exception&) {
      throw oretrace::ConfigError(path, "invalid value '" + text + "'");
    }
  }
  return j;
}

ExperimentConfig load(const std::string& command, const Flags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    c = oretrace::parse_config(ss.str());
    if (!c.command.empty() && c.command != command) {
      throw oretrace::ConfigError(
          "$.command", "config is for '" + c.command + "', not '" + command + "'");
    }
  }
  c.command = command;
  oretrace::apply_json(c, flags_json(f));
  if (f.transcripts) c.transcripts = true;
  oretrace::finalize(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oretrace: order-revealing encryption and learning experiments"};
  app.set_version_flag("--version", ORETRACE_VERSION);
  app.require_subcommand(1);

  std::map<std::string, Flags> flags;
  const std::map<std::string, std::string> help = {
      {"correctness", "decryption, weak and strong comparison correctness"},
      {"pac", "max-positive learner error per distribution family"},
      {"trace", "example reidentification: completeness, soundness, concentration"},
      {"games", "static and single-challenge indistinguishability games"},
      {"hybrid", "exhaustive hybrid schedule check"},
      {"sq", "statistical-query learner"},
      {"validsig", "ValidSig learning, tracing and forgery"}};
  for (const auto& name : oretrace::commands()) {
    add_common(app.add_subcommand(name, help.at(name)), flags[name]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Flags& f = flags.at(command);
  ExperimentConfig cfg;
  try {
    cfg = load(command, f);
  } catch (const oretrace::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  oretrace::Report rep;
  try {
    rep = oretrace::run_experiment(cfg);
  } catch (const oretrace::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  std::vector<std::string> paths;
  try {
    paths = oretrace::write_report(rep, cfg, f.out, f.format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (!f.quiet) {
    std::cout << command << (cfg.mode.empty() ? "" : " " + cfg.mode)
              << "  config " << cfg.hash_hex().substr(0, 16) << "  "
              << rep.rows.size() << " rows  " << rep.wall_clock_s << " s\n";
    for (const auto& g : rep.gates) {
      std::cout << "  " << (g.passed ? "PASS " : "FAIL ") << g.name << ": "
                << g.detail << "\n";
    }
    for (const auto& p : paths) std::cout << "  wrote " << p << "\n";
  }
  if (f.gate && !rep.gates_passed()) return kExitGate;
  return 0;
}
