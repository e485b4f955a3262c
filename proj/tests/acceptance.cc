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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.
// Usage: acceptance [config_dir] [out_dir] [comma-separated criterion ids]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fedtrigger/aggregation.h"
#include "fedtrigger/attack.h"
#include "fedtrigger/config.h"
#include "fedtrigger/dataset.h"
#include "fedtrigger/dct.h"
#include "fedtrigger/experiment.h"
#include "fedtrigger/federation.h"
#include "fedtrigger/model.h"
#include "fedtrigger/sgd.h"
#include "fedtrigger/stealth.h"
#include "fedtrigger/trigger.h"

namespace fedtrigger {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Tolerances and limits, fixed here.
constexpr double kPsnrTarget = 81.5933;
constexpr double kPsnrTol = 1e-3;
constexpr double kPsnrSeconds = 1.0;
constexpr double kDctRoundTripTol = 1e-9;
constexpr double kParsevalTol = 1e-9;
constexpr double kDctOracleTol = 1e-10;
constexpr double kDctSeconds = 5.0;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-6;
constexpr double kGradFloor = 1e-6;  // denominator floor for relative error
constexpr int kGradCoords = 240;
constexpr double kGradSeconds = 30.0;
constexpr double kReplayAsrMin = 0.70;
constexpr double kReplayAccDropMax = 0.10;
constexpr double kErasedAsrMax = 0.30;
constexpr double kSixAsrMin = 0.20;
constexpr double kDpAsrDropMin = 0.15;
constexpr double kDpAccDropMax = 0.15;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::vector<int> selected;  // empty: run everything

void Report(int id, const std::string& name, const std::function<Outcome()>& check) {
  if (!selected.empty() &&
      std::find(selected.begin(), selected.end(), id) == selected.end()) {
    return;
  }
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s [%d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id,
              name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ImageTensor RandomPixels(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  ImageTensor img({3, 32, 32});
  for (double& v : img.values()) v = d(rng);
  return img;
}

Outcome PsnrReproduction() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int n = 0;
  for (int i = 0; i < 20; ++i) {
    const ImageTensor img = RandomPixels(rng);
    for (auto [ch, pos] : {std::pair{Channel::kRed, 15}, std::pair{Channel::kGreen, 20},
                           std::pair{Channel::kBlue, 25}}) {
      const auto p = ApplyFreqTrigger(img, TriggerSpec{ch, pos, pos, 3, 100.0, 0}, false);
      worst = std::max(worst, std::abs(Psnr(img, p.image) - kPsnrTarget));
      ++n;
    }
  }
  const double secs = Seconds(t0);
  return {worst <= kPsnrTol && secs < kPsnrSeconds,
          Fmt("%d image-trigger pairs, max |psnr - %.4f| = %.2e, %.3fs", n, kPsnrTarget, worst, secs)};
}

Matrix DoubleSumDct(const Matrix& m) {
  const int n = m.rows();
  Matrix f(n, n);
  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
          s += m.at(x, y) * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n)) *
               std::cos(std::numbers::pi * (2 * y + 1) * v / (2.0 * n));
        }
      }
      const double cu = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      const double cv = v == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      f.at(u, v) = cu * cv * s;
    }
  }
  return f;
}

Outcome TransformCorrectness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> d(-255.0, 255.0);
  double round_trip = 0.0, parseval = 0.0, oracle = 0.0;
  for (int t = 0; t < 100; ++t) {
    Matrix m(32, 32);
    for (double& v : m.values()) v = d(rng);
    const Matrix f = Dct2(m);
    const Matrix back = Idct2(f);
    double e_m = 0.0, e_f = 0.0;
    for (std::size_t i = 0; i < m.values().size(); ++i) {
      round_trip = std::max(round_trip, std::abs(back.values()[i] - m.values()[i]));
      e_m += m.values()[i] * m.values()[i];
      e_f += f.values()[i] * f.values()[i];
    }
    parseval = std::max(parseval, std::abs(e_f - e_m) / e_m);
  }
  for (int t = 0; t < 10; ++t) {
    Matrix m(8, 8);
    for (double& v : m.values()) v = d(rng);
    const Matrix f = Dct2(m), ref = DoubleSumDct(m);
    for (std::size_t i = 0; i < f.values().size(); ++i) {
      oracle = std::max(oracle, std::abs(f.values()[i] - ref.values()[i]));
    }
  }
  const double secs = Seconds(t0);
  return {round_trip <= kDctRoundTripTol && parseval <= kParsevalTol &&
              oracle <= kDctOracleTol && secs < kDctSeconds,
          Fmt("round trip %.1e, parseval %.1e, oracle %.1e, %.2fs", round_trip,
              parseval, oracle, secs)};
}

Outcome GradientCorrectness() {
  const auto t0 = Clock::now();
  const ModelArch arch = ModelArch::TinyConv(10);
  const ParamVector p = InitParams(arch, 303);
  std::mt19937_64 rng(303);
  std::vector<ImageTensor> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(RandomPixels(rng));
  const std::vector<int> labels{1, 4, 7, 9};
  const ParamVector g = LossAndGrad(arch, p, batch, labels).grad;
  // Stratified draw so every layer contributes coordinates.
  std::vector<std::size_t> coords;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& lp : arch.plan()) {
    if (lp.param_count == 0) continue;
    const int share = kGradCoords / 3;
    for (int k = 0; k < share; ++k) {
      coords.push_back(lp.weight_offset +
                       static_cast<std::size_t>(u(rng) * lp.param_count));
    }
  }
  int ok = 0;
  double worst = 0.0;
  for (std::size_t i : coords) {
    ParamVector up = p, down = p;
    up[i] += kGradStep;
    down[i] -= kGradStep;
    const double numeric = (CrossEntropy(Forward(arch, up, batch), labels) -
                            CrossEntropy(Forward(arch, down, batch), labels)) /
                           (2.0 * kGradStep);
    const double rel = std::abs(numeric - g[i]) /
                       std::max({std::abs(numeric), std::abs(g[i]), kGradFloor});
    worst = std::max(worst, rel);
    ok += rel <= kGradRelTol;
  }
  const double secs = Seconds(t0);
  const int n = static_cast<int>(coords.size());
  return {ok == n && n >= 200 && secs < kGradSeconds,
          Fmt("%d/%d coordinates within %.0e, worst %.2e, %.1fs", ok, n, kGradRelTol,
              worst, secs)};
}

Outcome FederatedEqualsCentralized() {
  const ModelArch arch = ModelArch::TinyConv(10);
  const Dataset ds = SynthShapes(404, 20);
  FedConfig cfg;
  cfg.n_clients = 1;
  cfg.clients_per_round = 1;
  cfg.total_rounds = 3;
  cfg.warmup_rounds = 0;
  cfg.local_epochs = 1;
  cfg.server_lr = 1.0;
  cfg.seed = 404;
  const ParamVector init = InitParams(arch, cfg.seed);
  Federation fed(arch, cfg, {}, {}, {ds.examples}, init);
  for (int r = 0; r < 3; ++r) fed.RunRound(r);

  ParamVector p = init;
  const std::size_t n = ds.examples.size();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < 3; ++epoch) {
    Rng rng = DeriveRng(cfg.seed, Stream::kClientTraining,
                        {0, static_cast<std::uint64_t>(epoch)});
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    SgdState state;
    for (std::size_t b = 0; b < n; b += bs) {
      std::vector<ImageTensor> images;
      std::vector<int> labels;
      for (std::size_t i = b; i < std::min(n, b + bs); ++i) {
        images.push_back(ds.examples[order[i]].image);
        labels.push_back(ds.examples[order[i]].label);
      }
      SgdStep(p, LossAndGrad(arch, p, images, labels).grad, state, cfg.sgd);
    }
  }
  std::size_t differing = 0;
  for (std::size_t i = 0; i < p.size(); ++i) differing += fed.global()[i] != p[i];
  return {differing == 0,
          Fmt("%zu of %zu parameters differ after 3 rounds", differing, p.size())};
}

Outcome BatchCompositionCheck() {
  const auto c = ComposeCounts(64, 8.0 / 64, 3.0 / 64, 2);
  bool ok = c.own == 8 && c.per_other_replay == 3 && c.clean == 50;
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> bs_d(1, 512), n_d(0, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0, bad = 0;
  while (checked < 1000) {
    const int bs = bs_d(rng), n = n_d(rng);
    const double r_b = 0.6 * u(rng), r_br = 0.4 * u(rng) / std::max(n, 1);
    const int own = static_cast<int>(std::floor(r_b * bs + 0.5));
    const int per = static_cast<int>(std::floor(r_br * bs + 0.5));
    if (own + n * per > bs) continue;
    const auto k = ComposeCounts(bs, r_b, r_br, n);
    bad += !(k.own == own && k.per_other_replay == per &&
             k.clean == bs - own - n * per && k.own + n * k.per_other_replay + k.clean == bs);
    ++checked;
  }
  ok = ok && bad == 0;
  return {ok, Fmt("(64, 8/64, 3/64, 2) -> (%d, %d, %d); %d/1000 random configs wrong",
                  c.own, c.per_other_replay, c.clean, bad)};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double MeanPersist(const ExperimentResult& r) {
  double s = 0.0;
  for (const auto& a : r.attackers) s += a.asr_persist.value_or(0.0);
  return r.attackers.empty() ? 0.0 : s / r.attackers.size();
}

std::string AsrList(const ExperimentResult& r, bool persist) {
  std::string out;
  for (const auto& a : r.attackers) {
    if (!out.empty()) out += "/";
    out += Fmt("%.2f", persist ? a.asr_persist.value_or(-1.0) : a.asr_end);
  }
  return out;
}

struct Runs {
  ExperimentConfig base;
  AblationResult ablation;
  bool have = false;
};

Outcome ReplayAblation(Runs& runs, const fs::path& out) {
  runs.ablation = RunReplayAblation(runs.base, out / "ablation");
  runs.have = true;
  const auto& on = runs.ablation.replay_on;
  const auto& off = runs.ablation.replay_off;
  bool on_ok = true;
  for (const auto& a : on.attackers) on_ok &= a.asr_persist.value_or(0.0) >= kReplayAsrMin;
  const double acc_drop = runs.ablation.baseline.final_acc - on.final_acc;
  on_ok &= acc_drop <= kReplayAccDropMax;

  // Replay off: an earlier backdoor is (nearly) erased by the time a later
  // one finishes injecting, while the last one is implanted.
  bool erased = false;
  std::string where = "none";
  for (std::size_t j = 1; j < off.attackers.size(); ++j) {
    const RoundRecord* rec = off.At(off.attackers[j].last_round);
    if (!rec) continue;
    for (std::size_t i = 0; i < j; ++i) {
      if (rec->asr[i] <= kErasedAsrMax) {
        erased = true;
        where = Fmt("backdoor %zu at %.2f when %zu ends", i + 1, rec->asr[i], j + 1);
      }
    }
  }
  const double last = off.attackers.empty() ? 0.0 : off.attackers.back().asr_end;
  const bool off_ok = erased && last >= kReplayAsrMin;
  return {on_ok && off_ok,
          Fmt("replay on ASR-30 %s, acc drop %.3f; replay off erased: %s, last ASR %.2f",
              AsrList(on, true).c_str(), acc_drop, where.c_str(), last)};
}

Outcome SixAttackers(const fs::path& config_dir, const fs::path& out) {
  const ExperimentConfig cfg = LoadConfig(config_dir / "six_attackers.cfg");
  std::vector<AnyTrigger> triggers;
  for (const auto& a : cfg.attackers) triggers.push_back(a.Trigger(32, 32));
  const bool distinct = cfg.attackers.size() == 6 && TriggerSetViolations(triggers).empty();
  const ExperimentResult r = RunExperiment(cfg, out / "six_attackers");
  bool above = r.attackers.size() == 6;
  for (const auto& a : r.attackers) above &= a.asr_end > kSixAsrMin;
  return {distinct && above, Fmt("distinct %s, ASR at injection end %s",
                                 distinct ? "yes" : "no", AsrList(r, false).c_str())};
}

Outcome DefenseBehavior(Runs& runs, const fs::path& out) {
  if (!runs.have) runs.ablation.replay_on = RunExperiment(runs.base, out / "no_defense");
  const ExperimentResult& plain = runs.ablation.replay_on;

  ExperimentConfig dp = runs.base;
  dp.defense.kind = DefenseKind::kDpFedAvg;
  dp.defense.clip_bound = 0.0;  // adaptive: median update norm
  dp.defense.noise_sigma = 0.5;
  const ExperimentResult dp_r = RunExperiment(dp, out / "dpfedavg");
  const double asr_drop = MeanPersist(plain) - MeanPersist(dp_r);
  const double acc_drop = plain.final_acc - dp_r.final_acc;
  const bool dp_ok = asr_drop >= kDpAsrDropMin && acc_drop <= kDpAccDropMax;

  ExperimentConfig cc = runs.base;
  cc.defense.kind = DefenseKind::kClippedClustering;
  cc.attackers.resize(1);
  const ExperimentResult cc_r = RunExperiment(cc, out / "clipcluster_single");
  int rounds = 0, violations = 0;
  for (const auto& d : cc_r.diagnostics) {
    if (d.malicious_clients.empty()) continue;
    ++rounds;
    violations += d.max_malicious_clipped_norm > d.benign_median_norm;
  }
  const bool cc_ok = rounds > 0 && violations == 0;
  return {dp_ok && cc_ok,
          Fmt("dp mean ASR-30 %.2f vs %.2f (drop %.2f), acc drop %.3f; clipcluster "
              "%d/%d injection rounds within benign median",
              MeanPersist(dp_r), MeanPersist(plain), asr_drop, acc_drop,
              rounds - violations, rounds)};
}

Outcome StealthOrdering() {
  const Dataset test = SynthShapes(606, 10, 10, Stream::kSynthTest);
  const TriggerSpec freq{Channel::kRed, 15, 15, 3, 100.0, 0};
  const PatchTriggerSpec patch = PatchTriggerSpec::FourCorners(32, 32, 5, 0.8, 0);
  double s_freq = 0.0, s_patch = 0.0;
  for (const auto& ex : test.examples) {
    s_freq += Ssim(ex.image, ApplyFreqTrigger(ex.image, freq, true).image);
    s_patch += Ssim(ex.image, ApplyPatchTrigger(ex.image, patch).image);
  }
  const double n = static_cast<double>(test.examples.size());
  return {test.examples.size() == 100 && s_freq / n > s_patch / n,
          Fmt("%zu images: frequency SSIM %.4f, patch SSIM %.4f",
              test.examples.size(), s_freq / n, s_patch / n)};
}

Outcome Determinism(Runs& runs, const fs::path& out) {
  ExperimentConfig a = runs.base;
  a.fed.threads = 1;
  ExperimentConfig b = runs.base;
  b.fed.threads = 4;
  const fs::path first = runs.have ? out / "ablation" / "replay_on" : out / "det_1";
  if (!runs.have) RunExperiment(a, first);
  RunExperiment(b, out / "det_4");
  const std::string x = Slurp(first / "metrics.csv"), y = Slurp(out / "det_4" / "metrics.csv");
  return {!x.empty() && x == y,
          Fmt("metrics.csv %s across reruns with 1 and 4 threads (%zu bytes)",
              x == y ? "identical" : "differs", x.size())};
}

}  // namespace
}  // namespace fedtrigger

int main(int argc, char** argv) {
  using namespace fedtrigger;
  const fs::path config_dir = argc > 1 ? fs::path(argv[1]) : fs::path(FEDTRIGGER_CONFIG_DIR);
  const fs::path out = argc > 2 ? fs::path(argv[2]) : fs::path("acceptance_out");
  fs::create_directories(out);
  if (argc > 3) {
    std::stringstream ids(argv[3]);
    for (std::string id; std::getline(ids, id, ',');) selected.push_back(std::stoi(id));
  }

  Runs runs;
  try {
    runs.base = LoadConfig(config_dir / "default.cfg");
  } catch (const std::exception& e) {
    std::printf("cannot load default.cfg: %s\n", e.what());
    return 2;
  }
  Report(1, "PSNR reproduction", PsnrReproduction);
  Report(2, "transform correctness", TransformCorrectness);
  Report(3, "gradient correctness", GradientCorrectness);
  Report(4, "FL equals centralized", FederatedEqualsCentralized);
  Report(5, "batch composition", BatchCompositionCheck);
  Report(6, "replay ablation pattern", [&] { return ReplayAblation(runs, out); });
  Report(7, "six-attacker configuration", [&] { return SixAttackers(config_dir, out); });
  Report(8, "defense behavior", [&] { return DefenseBehavior(runs, out); });
  Report(9, "stealth ordering", StealthOrdering);
  Report(10, "determinism", [&] { return Determinism(runs, out); });
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
