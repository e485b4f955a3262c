// Copyright 2026 The Fedtrigger Authors
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


#include "fedtrigger/config.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fedtrigger/errors.h"

namespace fedtrigger {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  throw FormatError("bad value '" + std::string(value) + "' for " +
                    std::string(key) + " (expected " + std::string(expected) +
                    ")");
}

int ToInt(std::string_view key, std::string_view v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    BadValue(key, v, "an integer");
  }
  return out;
}

std::uint64_t ToU64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    BadValue(key, v, "a non-negative integer");
  }
  return out;
}

double ToDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    BadValue(key, v, "a finite number");
  }
  return out;
}

// Accepts a plain number or a fraction such as "8/64".
double ToRatio(std::string_view key, std::string_view v) {
  const auto slash = v.find('/');
  if (slash == std::string_view::npos) return ToDouble(key, v);
  const double num = ToDouble(key, Trim(v.substr(0, slash)));
  const double den = ToDouble(key, Trim(v.substr(slash + 1)));
  if (den == 0.0) BadValue(key, v, "a fraction with nonzero denominator");
  return num / den;
}

bool ToBool(std::string_view key, std::string_view v) {
  const std::string s = Lower(v);
  if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "0" || s == "no") return false;
  BadValue(key, v, "on or off");
}

Channel ToChannel(std::string_view key, std::string_view v) {
  const std::string s = Lower(v);
  if (s == "r" || s == "red") return Channel::kRed;
  if (s == "g" || s == "green") return Channel::kGreen;
  if (s == "b" || s == "blue") return Channel::kBlue;
  BadValue(key, v, "R, G or B");
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Setter = std::function<void(std::string_view key, std::string_view v)>;

std::map<std::string, Setter, std::less<>> GlobalSetters(ExperimentConfig& c) {
  return {
      {"seed", [&c](auto k, auto v) { c.fed.seed = ToU64(k, v); }},
      {"n_clients", [&c](auto k, auto v) { c.fed.n_clients = ToInt(k, v); }},
      {"clients_per_round",
       [&c](auto k, auto v) { c.fed.clients_per_round = ToInt(k, v); }},
      {"total_rounds",
       [&c](auto k, auto v) { c.fed.total_rounds = ToInt(k, v); }},
      {"warmup_rounds",
       [&c](auto k, auto v) { c.fed.warmup_rounds = ToInt(k, v); }},
      {"server_lr", [&c](auto k, auto v) { c.fed.server_lr = ToDouble(k, v); }},
      {"local_epochs",
       [&c](auto k, auto v) { c.fed.local_epochs = ToInt(k, v); }},
      {"batch_size", [&c](auto k, auto v) { c.fed.batch_size = ToInt(k, v); }},
      {"lr", [&c](auto k, auto v) { c.fed.sgd.learning_rate = ToDouble(k, v); }},
      {"momentum",
       [&c](auto k, auto v) { c.fed.sgd.momentum = ToDouble(k, v); }},
      {"weight_decay",
       [&c](auto k, auto v) { c.fed.sgd.weight_decay = ToDouble(k, v); }},
      {"dirichlet_alpha",
       [&c](auto k, auto v) { c.fed.dirichlet_alpha = ToDouble(k, v); }},
      {"threads", [&c](auto k, auto v) { c.fed.threads = ToInt(k, v); }},
      {"dataset",
       [&c](auto k, auto v) {
         const std::string s = Lower(v);
         if (s == "synth") {
           c.dataset = DatasetSource::kSynth;
         } else if (s == "raw") {
           c.dataset = DatasetSource::kRaw;
         } else {
           BadValue(k, v, "synth or raw");
         }
       }},
      {"num_classes", [&c](auto k, auto v) { c.num_classes = ToInt(k, v); }},
      {"synth_train_per_class",
       [&c](auto k, auto v) { c.synth_train_per_class = ToInt(k, v); }},
      {"synth_test_per_class",
       [&c](auto k, auto v) { c.synth_test_per_class = ToInt(k, v); }},
      {"raw_train", [&c](auto, auto v) { c.raw_train = std::string(v); }},
      {"raw_test", [&c](auto, auto v) { c.raw_test = std::string(v); }},
      {"defense",
       [&c](auto k, auto v) {
         try {
           c.defense.kind = ParseDefense(Lower(v));
         } catch (const Error&) {
           BadValue(k, v, "none, clipcluster or dpfedavg");
         }
       }},
      {"dp_clip",
       [&c](auto k, auto v) {
         c.defense.clip_bound = Lower(v) == "auto" ? 0.0 : ToDouble(k, v);
       }},
      {"dp_sigma",
       [&c](auto k, auto v) { c.defense.noise_sigma = ToDouble(k, v); }},
      {"replay", [&c](auto k, auto v) { c.replay = ToBool(k, v); }},
      {"replay_mode",
       [&c](auto k, auto v) {
         const std::string s = Lower(v);
         if (s == "direct") {
           c.replay_mode = ReplayMode::kDirect;
         } else if (s == "pool") {
           c.replay_mode = ReplayMode::kPool;
         } else {
           BadValue(k, v, "direct or pool");
         }
       }},
      {"share_gamma",
       [&c](auto k, auto v) { c.fed.share_gamma = ToBool(k, v); }},
      {"replay_pool",
       [&c](auto k, auto v) { c.fed.replay_pool_per_attacker = ToInt(k, v); }},
      {"attacker_epochs",
       [&c](auto k, auto v) { c.attacker_epochs = ToInt(k, v); }},
      {"attacker_lr",
       [&c](auto k, auto v) { c.attacker_lr = ToDouble(k, v); }},
      {"attacker_lr_decay",
       [&c](auto k, auto v) { c.attacker_lr_decay = ToDouble(k, v); }},
      {"eval_every_warmup",
       [&c](auto k, auto v) { c.eval_every_warmup = ToInt(k, v); }},
      {"stealth_images",
       [&c](auto k, auto v) { c.stealth_images = ToInt(k, v); }},
      {"persistence_window",
       [&c](auto k, auto v) { c.persistence_window = ToInt(k, v); }},
  };
}

std::map<std::string, Setter, std::less<>> AttackerSetters(AttackerConfig& a) {
  return {
      {"trigger",
       [&a](auto k, auto v) {
         const std::string s = Lower(v);
         if (s == "freq") {
           a.trigger = TriggerKind::kFrequency;
         } else if (s == "patch") {
           a.trigger = TriggerKind::kPatch;
         } else {
           BadValue(k, v, "freq or patch");
         }
       }},
      {"channel", [&a](auto k, auto v) { a.channel = ToChannel(k, v); }},
      {"block_u", [&a](auto k, auto v) { a.block_u = ToInt(k, v); }},
      {"block_v", [&a](auto k, auto v) { a.block_v = ToInt(k, v); }},
      {"block_size", [&a](auto k, auto v) { a.block_size = ToInt(k, v); }},
      {"magnitude", [&a](auto k, auto v) { a.magnitude = ToDouble(k, v); }},
      {"target", [&a](auto k, auto v) { a.target = ToInt(k, v); }},
      {"patch_size", [&a](auto k, auto v) { a.patch_size = ToInt(k, v); }},
      {"transparency",
       [&a](auto k, auto v) { a.transparency = ToDouble(k, v); }},
      {"r_b", [&a](auto k, auto v) { a.r_b = ToRatio(k, v); }},
      {"r_br", [&a](auto k, auto v) { a.r_br = ToRatio(k, v); }},
      {"gamma",
       [&a](auto k, auto v) {
         if (Lower(v) == "auto") {
           a.gamma.reset();
         } else {
           a.gamma = ToDouble(k, v);
         }
       }},
      {"inject_start", [&a](auto k, auto v) { a.inject_start = ToInt(k, v); }},
      {"inject_len", [&a](auto k, auto v) { a.inject_len = ToInt(k, v); }},
      {"client",
       [&a](auto k, auto v) {
         if (Lower(v) == "auto") {
           a.client.reset();
         } else {
           a.client = ToInt(k, v);
         }
       }},
  };
}

}  // namespace

AnyTrigger AttackerConfig::Trigger(int height, int width) const {
  if (trigger == TriggerKind::kPatch) {
    return PatchTriggerSpec::FourCorners(height, width, patch_size,
                                         transparency, target);
  }
  return TriggerSpec{channel, block_u, block_v, block_size, magnitude, target};
}

void SetConfigValue(ExperimentConfig& cfg, int section, std::string_view key,
                    std::string_view value) {
  if (section < 0) {
    auto setters = GlobalSetters(cfg);
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw FormatError("unknown key '" + std::string(key) + "'");
    }
    it->second(key, value);
    return;
  }
  if (section >= static_cast<int>(cfg.attackers.size())) {
    throw FormatError("no attacker section " + std::to_string(section));
  }
  auto setters = AttackerSetters(cfg.attackers[section]);
  auto it = setters.find(key);
  if (it == setters.end()) {
    throw FormatError("unknown attacker key '" + std::string(key) + "'");
  }
  it->second(key, value);
}

ExperimentConfig ParseConfig(std::string_view text) {
  ExperimentConfig cfg;
  int section = -1;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw FormatError(where + "unterminated section header");
      }
      const std::string name = Lower(Trim(line.substr(1, line.size() - 2)));
      if (name != "attacker") {
        throw FormatError(where + "unknown section [" + name + "]");
      }
      cfg.attackers.emplace_back();
      cfg.attackers.back().inject_start =
          cfg.fed.warmup_rounds + 2 + static_cast<int>(cfg.attackers.size()) - 1;
      section = static_cast<int>(cfg.attackers.size()) - 1;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError(where + "expected 'key = value'");
    }
    const std::string key = Lower(Trim(line.substr(0, eq)));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (value.empty()) {
      throw FormatError(where + "missing value for '" + key + "'");
    }
    try {
      SetConfigValue(cfg, section, key, value);
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    }
  }
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  try {
    cfg = ParseConfig(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string SerializeConfig(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.fed.seed << "\n"
    << "n_clients = " << c.fed.n_clients << "\n"
    << "clients_per_round = " << c.fed.clients_per_round << "\n"
    << "total_rounds = " << c.fed.total_rounds << "\n"
    << "warmup_rounds = " << c.fed.warmup_rounds << "\n"
    << "server_lr = " << Num(c.fed.server_lr) << "\n"
    << "local_epochs = " << c.fed.local_epochs << "\n"
    << "batch_size = " << c.fed.batch_size << "\n"
    << "lr = " << Num(c.fed.sgd.learning_rate) << "\n"
    << "momentum = " << Num(c.fed.sgd.momentum) << "\n"
    << "weight_decay = " << Num(c.fed.sgd.weight_decay) << "\n"
    << "dirichlet_alpha = " << Num(c.fed.dirichlet_alpha) << "\n"
    << "threads = " << c.fed.threads << "\n"
    << "dataset = " << (c.dataset == DatasetSource::kSynth ? "synth" : "raw")
    << "\n"
    << "num_classes = " << c.num_classes << "\n"
    << "synth_train_per_class = " << c.synth_train_per_class << "\n"
    << "synth_test_per_class = " << c.synth_test_per_class << "\n";
  if (!c.raw_train.empty()) o << "raw_train = " << c.raw_train.string() << "\n";
  if (!c.raw_test.empty()) o << "raw_test = " << c.raw_test.string() << "\n";
  o << "defense = " << DefenseName(c.defense.kind) << "\n"
    << "dp_clip = "
    << (c.defense.clip_bound > 0.0 ? Num(c.defense.clip_bound) : "auto") << "\n"
    << "dp_sigma = " << Num(c.defense.noise_sigma) << "\n"
    << "replay = " << (c.replay ? "on" : "off") << "\n"
    << "replay_mode = " << ReplayModeName(c.replay_mode) << "\n"
    << "share_gamma = " << (c.fed.share_gamma ? "on" : "off") << "\n"
    << "replay_pool = " << c.fed.replay_pool_per_attacker << "\n"
    << "attacker_epochs = " << c.attacker_epochs << "\n"
    << "attacker_lr = " << Num(c.attacker_lr) << "\n"
    << "attacker_lr_decay = " << Num(c.attacker_lr_decay) << "\n"
    << "eval_every_warmup = " << c.eval_every_warmup << "\n"
    << "stealth_images = " << c.stealth_images << "\n"
    << "persistence_window = " << c.persistence_window << "\n";
  for (const auto& a : c.attackers) {
    o << "\n[attacker]\n";
    if (a.trigger == TriggerKind::kPatch) {
      o << "trigger = patch\n"
        << "patch_size = " << a.patch_size << "\n"
        << "transparency = " << Num(a.transparency) << "\n";
    } else {
      o << "trigger = freq\n"
        << "channel = " << ChannelName(a.channel) << "\n"
        << "block_u = " << a.block_u << "\n"
        << "block_v = " << a.block_v << "\n"
        << "block_size = " << a.block_size << "\n"
        << "magnitude = " << Num(a.magnitude) << "\n";
    }
    o << "target = " << a.target << "\n"
      << "r_b = " << Num(a.r_b) << "\n"
      << "r_br = " << Num(a.r_br) << "\n"
      << "gamma = " << (a.gamma ? Num(*a.gamma) : "auto") << "\n"
      << "inject_start = " << a.inject_start << "\n"
      << "inject_len = " << a.inject_len << "\n"
      << "client = " << (a.client ? std::to_string(*a.client) : "auto")
      << "\n";
  }
  return o.str();
}

std::vector<std::string> ExperimentConfig::Violations() const {
  std::vector<std::string> out = fed.Violations();
  if (defense.kind == DefenseKind::kDpFedAvg && !(defense.noise_sigma >= 0.0)) {
    out.push_back("dp_sigma must be >= 0");
  }
  if (num_classes < 2) out.push_back("num_classes must be >= 2");
  if (dataset == DatasetSource::kSynth) {
    if (num_classes > 10) out.push_back("synth dataset supports at most 10 classes");
    if (synth_train_per_class < 1) out.push_back("synth_train_per_class must be >= 1");
    if (synth_test_per_class < 1) out.push_back("synth_test_per_class must be >= 1");
  } else {
    for (const auto& [key, p] : {std::pair{"raw_train", raw_train},
                                 std::pair{"raw_test", raw_test}}) {
      if (p.empty()) {
        out.push_back(std::string(key) + " is required for dataset = raw");
      } else if (!std::filesystem::exists(p)) {
        out.push_back(std::string(key) + " does not exist: " + p.string());
      }
    }
  }
  if (attacker_epochs < 1) out.push_back("attacker_epochs must be >= 1");
  if (!(attacker_lr > 0.0)) out.push_back("attacker_lr must be > 0");
  if (!(attacker_lr_decay >= 0.0 && attacker_lr_decay <= 1.0)) {
    out.push_back("attacker_lr_decay must be in [0, 1]");
  }
  if (eval_every_warmup < 1) out.push_back("eval_every_warmup must be >= 1");
  if (stealth_images < 1) out.push_back("stealth_images must be >= 1");
  if (persistence_window < 0) out.push_back("persistence_window must be >= 0");

  const int n = static_cast<int>(attackers.size());
  if (n > fed.n_clients) out.push_back("more attackers than clients");
  std::set<int> clients;
  std::vector<AnyTrigger> triggers;
  for (int i = 0; i < n; ++i) {
    const auto& a = attackers[i];
    const std::string who = "attacker " + std::to_string(i + 1) + ": ";
    const int client = a.client.value_or(i);
    if (client < 0 || client >= fed.n_clients) {
      out.push_back(who + "client must be in [0, n_clients)");
    } else if (!clients.insert(client).second) {
      out.push_back(who + "client " + std::to_string(client) +
                    " is already controlled by another attacker");
    }
    const AnyTrigger trig = a.Trigger(32, 32);
    for (const auto& v : TriggerViolations(trig, {3, 32, 32}, num_classes)) {
      out.push_back(who + v);
    }
    triggers.push_back(trig);
    if (!(a.r_b >= 0.0 && a.r_b <= 1.0)) out.push_back(who + "r_b must be in [0, 1]");
    if (!(a.r_br >= 0.0 && a.r_br <= 1.0)) out.push_back(who + "r_br must be in [0, 1]");
    if (a.r_b + (n - 1) * a.r_br > 1.0 + 1e-12) {
      out.push_back(who + "r_b + (n_attackers - 1) * r_br exceeds 1");
    }
    if (a.gamma && !(*a.gamma >= 1.0)) out.push_back(who + "gamma must be >= 1");
    if (a.inject_len < 1) out.push_back(who + "inject_len must be >= 1");
    if (a.inject_start < 0 ||
        a.inject_start + a.inject_len > fed.total_rounds) {
      out.push_back(who + "injection window must lie within [0, total_rounds)");
    }
  }
  for (const auto& v : TriggerSetViolations(triggers)) out.push_back(v);
  return out;
}

void ExperimentConfig::Validate() const {
  auto problems = Violations();
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::vector<AttackerSpec> ResolveAttackers(const ExperimentConfig& cfg,
                                           int height, int width) {
  std::vector<AttackerSpec> out;
  const int n = static_cast<int>(cfg.attackers.size());
  for (int i = 0; i < n; ++i) {
    const auto& a = cfg.attackers[i];
    AttackerSpec s;
    s.id = i + 1;
    s.client_id = a.client.value_or(i);
    s.trigger = a.Trigger(height, width);
    if (cfg.replay) {
      s.r_b = a.r_b;
      s.r_br = a.r_br;
    } else {
      s.r_b = a.r_b + (n - 1) * a.r_br;
      s.r_br = 0.0;
    }
    s.injection_rounds = InjectionWindow(a.inject_start, a.inject_len);
    s.local_epochs = cfg.attacker_epochs;
    s.sgd = SgdConfig{cfg.attacker_lr, cfg.fed.sgd.momentum,
                      cfg.fed.sgd.weight_decay, cfg.attacker_lr_decay};
    s.gamma = a.gamma.value_or(static_cast<double>(cfg.fed.clients_per_round));
    s.replay_mode = cfg.replay_mode;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fedtrigger
