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


#include "fedtrigger/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fedtrigger/dataset.h"
#include "fedtrigger/errors.h"
#include "fedtrigger/model.h"
#include "fedtrigger/partition.h"
#include "fedtrigger/rng.h"
#include "fedtrigger/stealth.h"

namespace fedtrigger {
namespace {

std::string Fixed(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::string TriggerLabel(const AnyTrigger& trigger) {
  if (const auto* f = std::get_if<TriggerSpec>(&trigger)) {
    return "freq-" + ChannelName(f->channel) + "-" + std::to_string(f->block_u) +
           "-" + std::to_string(f->block_v) + "-s" +
           std::to_string(f->block_size) + "-m" + Compact(f->magnitude);
  }
  const auto& p = std::get<PatchTriggerSpec>(trigger);
  return "patch-" + std::to_string(p.corners.size()) + "x" +
         std::to_string(p.patch_size) + "-t" + Compact(p.transparency);
}

struct Data {
  Dataset train;
  Dataset test;
};

Data LoadData(const ExperimentConfig& cfg) {
  Data d;
  if (cfg.dataset == DatasetSource::kSynth) {
    d.train = SynthShapes(cfg.fed.seed, cfg.synth_train_per_class,
                          cfg.num_classes, Stream::kSynthTrain);
    d.test = SynthShapes(cfg.fed.seed, cfg.synth_test_per_class,
                         cfg.num_classes, Stream::kSynthTest);
  } else {
    d.train = ReadRawBin(cfg.raw_train, cfg.num_classes);
    d.test = ReadRawBin(cfg.raw_test, cfg.num_classes);
  }
  return d;
}

std::vector<StealthRow> MeasureTriggers(const ExperimentConfig& cfg,
                                        const std::vector<AttackerSpec>& specs,
                                        const Dataset& test) {
  const std::size_t n =
      std::min<std::size_t>(cfg.stealth_images, test.examples.size());
  std::vector<std::size_t> idx(test.examples.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = DeriveRng(cfg.fed.seed, Stream::kStealthSample);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());

  std::vector<StealthRow> rows;
  for (const auto& spec : specs) {
    StealthRow row;
    row.attacker = spec.id;
    row.trigger = TriggerLabel(spec.trigger);
    for (std::size_t i : idx) {
      const ImageTensor& clean = test.examples[i].image;
      const PoisonedSample p = ApplyTrigger(clean, spec.trigger, false);
      const StealthReport r = MeasureStealth(clean, p.image);
      row.ssim += r.ssim;
      row.psnr += r.psnr;
      double e = 0.0;
      for (std::size_t k = 0; k < clean.values().size(); ++k) {
        const double d = p.image.values()[k] - clean.values()[k];
        e += d * d;
      }
      row.energy += e;
    }
    row.ssim /= static_cast<double>(n);
    row.psnr /= static_cast<double>(n);
    row.energy /= static_cast<double>(n);
    rows.push_back(row);
  }
  return rows;
}

RoundDiagnostics Diagnose(const RoundOutcome& out) {
  RoundDiagnostics d;
  d.round = out.round;
  d.delta_norm = out.delta_norm;
  d.malicious_clients = out.malicious_clients;
  d.clip_bound = out.aggregation.clip_bound;
  d.accepted = static_cast<int>(out.aggregation.accepted_clients.size());
  std::vector<double> benign;
  for (std::size_t i = 0; i < out.selected.size(); ++i) {
    const bool malicious =
        std::find(out.malicious_clients.begin(), out.malicious_clients.end(),
                  out.selected[i]) != out.malicious_clients.end();
    const double raw = out.aggregation.raw_norms.at(i);
    if (malicious) {
      d.max_malicious_raw_norm = std::max(d.max_malicious_raw_norm, raw);
      d.max_malicious_clipped_norm = std::max(
          d.max_malicious_clipped_norm, out.aggregation.clipped_norms.at(i));
    } else {
      benign.push_back(raw);
    }
  }
  if (!benign.empty()) d.benign_median_norm = LowerMedian(benign);
  return d;
}

std::string DiagnosticsCsv(const ExperimentResult& r) {
  std::ostringstream o;
  o << "round,delta_norm,malicious,clip_bound,benign_median_norm,"
       "max_malicious_raw_norm,max_malicious_clipped_norm,accepted\n";
  for (const auto& d : r.diagnostics) {
    std::string mal;
    for (int c : d.malicious_clients) {
      if (!mal.empty()) mal += ' ';
      mal += std::to_string(c);
    }
    o << d.round << ',' << Fixed(d.delta_norm) << ',' << mal << ','
      << Fixed(d.clip_bound) << ',' << Fixed(d.benign_median_norm) << ','
      << Fixed(d.max_malicious_raw_norm) << ','
      << Fixed(d.max_malicious_clipped_norm) << ',' << d.accepted << '\n';
  }
  return o.str();
}

std::vector<std::string> SplitList(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// One entry per attacker from "a" (broadcast) or "a/b/c".
std::vector<std::string> PerAttacker(const std::string& param,
                                     const std::string& value, std::size_t n) {
  auto parts = SplitList(value, '/');
  if (parts.size() == 1) parts.assign(n, parts.front());
  if (parts.size() != n) {
    throw FormatError(param + " value '" + value + "' must list 1 or " +
                      std::to_string(n) + " entries");
  }
  return parts;
}

double Mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string DirName(const std::string& param, const std::string& value) {
  std::string v = value;
  std::replace(v.begin(), v.end(), '/', '-');
  return param + "=" + v;
}

}  // namespace

const RoundRecord* ExperimentResult::At(int round) const {
  auto it = std::lower_bound(
      records.begin(), records.end(), round,
      [](const RoundRecord& r, int value) { return r.round < value; });
  return it != records.end() && it->round == round ? &*it : nullptr;
}

bool IsEvaluationRound(const ExperimentConfig& cfg, int round) {
  const int w = cfg.fed.warmup_rounds;
  return round >= w - 1 || (round + 1) % cfg.eval_every_warmup == 0;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               const std::optional<std::filesystem::path>& out_dir,
                               const ProgressFn& progress) {
  cfg.Validate();
  Data data = LoadData(cfg);
  const Shape3 shape = data.train.examples.front().image.shape();
  const ModelArch arch = ModelArch::TinyConv(cfg.num_classes, shape);
  const auto specs = ResolveAttackers(cfg, shape.height, shape.width);

  const PartitionPlan plan = DirichletPartition(
      data.train, cfg.fed.n_clients, cfg.fed.dirichlet_alpha, cfg.fed.seed);
  std::vector<std::vector<LabeledExample>> client_data;
  for (const auto& idx : plan.clients) {
    client_data.push_back(Subset(data.train, idx).examples);
  }

  std::vector<AnyTrigger> triggers;
  for (const auto& s : specs) triggers.push_back(s.trigger);
  const EvaluationSet eval = BuildEvaluationSet(data.test, triggers);

  Federation fed(arch, cfg.fed, cfg.defense, specs, std::move(client_data),
                 InitParams(arch, cfg.fed.seed));
  ExperimentResult result;
  for (int round = 0; round < cfg.fed.total_rounds; ++round) {
    RoundOutcome outcome;
    try {
      outcome = fed.RunRound(round);
    } catch (const Error& e) {
      throw Error("round " + std::to_string(round) + ": " + e.what());
    }
    result.diagnostics.push_back(Diagnose(outcome));
    if (!IsEvaluationRound(cfg, round)) continue;
    RoundRecord rec = Evaluate(arch, fed.global(), eval);
    rec.round = round;
    rec.delta_norm = outcome.delta_norm;
    rec.aggregation = DefenseName(cfg.defense.kind);
    if (progress) progress(rec);
    result.records.push_back(std::move(rec));
  }
  if (const RoundRecord* w = result.At(cfg.fed.warmup_rounds - 1)) {
    result.warmup_acc = w->acc;
  }
  result.final_acc = result.records.back().acc;

  for (std::size_t i = 0; i < specs.size(); ++i) {
    AttackerSummary s;
    s.attacker = specs[i].id;
    s.target = TargetLabel(specs[i].trigger);
    s.first_round = *specs[i].injection_rounds.begin();
    s.last_round = *specs[i].injection_rounds.rbegin();
    if (const RoundRecord* r = result.At(s.last_round)) s.asr_end = r->asr[i];
    if (const RoundRecord* r =
            result.At(s.last_round + cfg.persistence_window)) {
      s.asr_persist = r->asr[i];
    }
    result.attackers.push_back(s);
  }
  result.stealth = MeasureTriggers(cfg, specs, data.test);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    WriteFile(*out_dir / "metrics.csv", MetricsCsv(result, specs.size()));
    WriteFile(*out_dir / "stealth.csv", StealthCsv(result));
    WriteFile(*out_dir / "diagnostics.csv", DiagnosticsCsv(result));
    WriteFile(*out_dir / "summary.txt", SummaryText(cfg, result));
    WriteFile(*out_dir / "config.cfg", SerializeConfig(cfg));
  }
  return result;
}

std::string MetricsCsv(const ExperimentResult& result, int n_attackers) {
  std::ostringstream o;
  o << "round,acc";
  for (int i = 1; i <= n_attackers; ++i) o << ",asr_" << i;
  o << ",agg\n";
  for (const auto& r : result.records) {
    o << r.round << ',' << Fixed(r.acc);
    for (double a : r.asr) o << ',' << Fixed(a);
    o << ',' << r.aggregation << '\n';
  }
  return o.str();
}

std::string StealthCsv(const ExperimentResult& result) {
  std::ostringstream o;
  o << "attacker,trigger,ssim,psnr,energy\n";
  for (const auto& s : result.stealth) {
    o << s.attacker << ',' << s.trigger << ',' << Fixed(s.ssim) << ','
      << Fixed(s.psnr) << ',' << Fixed(s.energy) << '\n';
  }
  return o.str();
}

std::string SummaryText(const ExperimentConfig& cfg,
                        const ExperimentResult& result) {
  std::ostringstream o;
  o << "rounds = " << cfg.fed.total_rounds << '\n'
    << "defense = " << DefenseName(cfg.defense.kind) << '\n'
    << "replay = " << (cfg.replay ? "on" : "off") << '\n'
    << "warmup_acc = " << Fixed(result.warmup_acc) << '\n'
    << "final_acc = " << Fixed(result.final_acc) << '\n';
  std::vector<double> ends;
  std::vector<double> persists;
  for (const auto& a : result.attackers) {
    const std::string k = "attacker." + std::to_string(a.attacker) + ".";
    o << k << "target = " << a.target << '\n'
      << k << "injection = " << a.first_round << "-" << a.last_round << '\n'
      << k << "asr_end = " << Fixed(a.asr_end) << '\n'
      << k << "asr_" << cfg.persistence_window << " = "
      << (a.asr_persist ? Fixed(*a.asr_persist) : "n/a") << '\n';
    ends.push_back(a.asr_end);
    if (a.asr_persist) persists.push_back(*a.asr_persist);
  }
  if (!ends.empty()) {
    o << "mean_asr_end = " << Fixed(Mean(ends)) << '\n'
      << "mean_asr_" << cfg.persistence_window << " = "
      << (persists.size() == ends.size() ? Fixed(Mean(persists)) : "n/a")
      << '\n';
  }
  return o.str();
}

const std::vector<std::string>& SweepParameters() {
  static const std::vector<std::string> kParams = {
      "magnitude", "block_size", "block_position",
      "ratio",     "interval",   "targets"};
  return kParams;
}

ExperimentConfig ApplySweepValue(const ExperimentConfig& base,
                                 const std::string& param,
                                 const std::string& value) {
  ExperimentConfig cfg = base;
  const std::size_t n = cfg.attackers.size();
  if (std::find(SweepParameters().begin(), SweepParameters().end(), param) ==
      SweepParameters().end()) {
    throw ConfigError("unknown sweep parameter '" + param + "'");
  }
  if (n == 0) throw ConfigError("sweeps need at least one attacker");
  if (param == "ratio") {
    const auto parts = SplitList(value, '/');
    if (parts.size() != 2) {
      throw FormatError("ratio value '" + value + "' must be own/replay");
    }
    for (std::size_t i = 0; i < n; ++i) {
      SetConfigValue(cfg, static_cast<int>(i), "r_b",
                     parts[0] + "/" + std::to_string(cfg.fed.batch_size));
      SetConfigValue(cfg, static_cast<int>(i), "r_br",
                     parts[1] + "/" + std::to_string(cfg.fed.batch_size));
    }
  } else if (param == "interval") {
    int interval = 0;
    const auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), interval);
    if (ec != std::errc() || ptr != value.data() + value.size() ||
        interval < 1) {
      throw FormatError("interval value '" + value +
                        "' must be a positive integer");
    }
    const int first = cfg.attackers[0].inject_start;
    int last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& a = cfg.attackers[i];
      a.inject_start = first + static_cast<int>(i) * interval;
      last = std::max(last, a.inject_start + a.inject_len - 1);
    }
    cfg.fed.total_rounds =
        std::max(cfg.fed.total_rounds, last + cfg.persistence_window + 1);
  } else {
    const auto parts = PerAttacker(param, value, n);
    for (std::size_t i = 0; i < n; ++i) {
      const int s = static_cast<int>(i);
      if (param == "magnitude") {
        SetConfigValue(cfg, s, "magnitude", parts[i]);
      } else if (param == "block_size") {
        SetConfigValue(cfg, s, "block_size", parts[i]);
      } else if (param == "block_position") {
        SetConfigValue(cfg, s, "block_u", parts[i]);
        SetConfigValue(cfg, s, "block_v", parts[i]);
      } else {
        SetConfigValue(cfg, s, "target", parts[i]);
      }
    }
  }
  return cfg;
}

std::vector<SweepEntry> RunSweep(const ExperimentConfig& base,
                                 const std::string& param,
                                 const std::vector<std::string>& values,
                                 const std::filesystem::path& out_dir,
                                 const ProgressFn& progress) {
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    configs.push_back(ApplySweepValue(base, param, v));
    configs.back().Validate();
  }
  std::vector<SweepEntry> entries;
  std::ostringstream csv;
  csv << "param,value,final_acc,mean_asr_end,mean_asr_persist,"
         "min_asr_persist,mean_ssim,mean_psnr,mean_energy\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepEntry e{values[i],
                 RunExperiment(configs[i], out_dir / DirName(param, values[i]),
                               progress)};
    std::vector<double> ends, persists, ssim, psnr, energy;
    for (const auto& a : e.result.attackers) {
      ends.push_back(a.asr_end);
      if (a.asr_persist) persists.push_back(*a.asr_persist);
    }
    for (const auto& s : e.result.stealth) {
      ssim.push_back(s.ssim);
      psnr.push_back(s.psnr);
      energy.push_back(s.energy);
    }
    const bool full = persists.size() == ends.size();
    csv << param << ',' << values[i] << ',' << Fixed(e.result.final_acc) << ','
        << Fixed(Mean(ends)) << ',' << (full ? Fixed(Mean(persists)) : "n/a")
        << ','
        << (full ? Fixed(*std::min_element(persists.begin(), persists.end()))
                 : "n/a")
        << ',' << Fixed(Mean(ssim)) << ',' << Fixed(Mean(psnr)) << ','
        << Fixed(Mean(energy)) << '\n';
    entries.push_back(std::move(e));
  }
  std::filesystem::create_directories(out_dir);
  WriteFile(out_dir / "sweep.csv", csv.str());
  return entries;
}

AblationResult RunReplayAblation(const ExperimentConfig& base,
                                 const std::filesystem::path& out_dir,
                                 const ProgressFn& progress) {
  ExperimentConfig benign = base;
  benign.attackers.clear();
  ExperimentConfig on = base;
  on.replay = true;
  ExperimentConfig off = base;
  off.replay = false;
  on.Validate();
  off.Validate();

  AblationResult r;
  r.baseline = RunExperiment(benign, out_dir / "baseline", progress);
  r.replay_on = RunExperiment(on, out_dir / "replay_on", progress);
  r.replay_off = RunExperiment(off, out_dir / "replay_off", progress);

  const std::size_t n = base.attackers.size();
  std::ostringstream csv;
  csv << "variant,final_acc";
  for (std::size_t i = 1; i <= n; ++i) csv << ",asr_end_" << i;
  for (std::size_t i = 1; i <= n; ++i) csv << ",asr_persist_" << i;
  csv << '\n';
  auto row = [&](const char* name, const ExperimentResult& res) {
    csv << name << ',' << Fixed(res.final_acc);
    for (std::size_t i = 0; i < n; ++i) {
      csv << ',' << (i < res.attackers.size() ? Fixed(res.attackers[i].asr_end)
                                              : "n/a");
    }
    for (std::size_t i = 0; i < n; ++i) {
      csv << ','
          << (i < res.attackers.size() && res.attackers[i].asr_persist
                  ? Fixed(*res.attackers[i].asr_persist)
                  : "n/a");
    }
    csv << '\n';
  };
  row("baseline", r.baseline);
  row("replay_on", r.replay_on);
  row("replay_off", r.replay_off);
  WriteFile(out_dir / "ablation.csv", csv.str());
  return r;
}

}  // namespace fedtrigger
