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


#ifndef FEDTRIGGER_EXPERIMENT_H_
#define FEDTRIGGER_EXPERIMENT_H_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedtrigger/config.h"
#include "fedtrigger/federation.h"

namespace fedtrigger {

// Server-side view of one round, recorded for every round.
struct RoundDiagnostics {
  int round = 0;
  double delta_norm = 0.0;
  std::vector<int> malicious_clients;
  double clip_bound = 0.0;           // 0 when the defense does not clip
  double benign_median_norm = 0.0;   // lower median of benign raw norms
  double max_malicious_raw_norm = 0.0;
  double max_malicious_clipped_norm = 0.0;
  int accepted = 0;                  // updates that entered the average
};

struct StealthRow {
  int attacker = 0;
  std::string trigger;  // e.g. freq-R-15-15-s3-m100
  double ssim = 0.0;
  double psnr = 0.0;    // +inf when the trigger leaves images unchanged
  double energy = 0.0;  // mean squared L2 norm of the unclipped perturbation
};

struct AttackerSummary {
  int attacker = 0;
  int target = 0;
  int first_round = 0;
  int last_round = 0;
  double asr_end = 0.0;               // at last_round
  std::optional<double> asr_persist;  // at last_round + persistence_window
};

struct ExperimentResult {
  std::vector<RoundRecord> records;  // evaluated rounds, ascending
  std::vector<RoundDiagnostics> diagnostics;
  std::vector<StealthRow> stealth;
  std::vector<AttackerSummary> attackers;
  double warmup_acc = 0.0;  // ACC after the last warmup round
  double final_acc = 0.0;

  // Record of `round`, if it was evaluated.
  const RoundRecord* At(int round) const;
};

using ProgressFn = std::function<void(const RoundRecord&)>;

// Whether `round` is evaluated: every eval_every_warmup-th warmup round, the
// last warmup round and every round after warmup.
bool IsEvaluationRound(const ExperimentConfig& cfg, int round);

// Validates `cfg`, builds data and clients, runs every round and measures
// trigger stealth. When `out_dir` is set, writes metrics.csv, stealth.csv,
// diagnostics.csv, summary.txt and the resolved config.cfg there. Errors
// raised inside a round are rethrown as Error naming the round.
ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               const std::optional<std::filesystem::path>&
                                   out_dir = std::nullopt,
                               const ProgressFn& progress = {});

std::string MetricsCsv(const ExperimentResult& result, int n_attackers);
std::string StealthCsv(const ExperimentResult& result);
std::string SummaryText(const ExperimentConfig& cfg,
                        const ExperimentResult& result);

// Sweepable parameters: magnitude, block_size, block_position, ratio,
// interval, targets. Multi-attacker values are '/'-separated, one entry per
// attacker or a single entry for all (e.g. block_position 15/20/25 or 20,
// ratio 8/3 as own/replay samples per batch, targets 0/4/6).
const std::vector<std::string>& SweepParameters();

// Copy of `base` with `param` set to `value`. Throws ConfigError on an
// unknown parameter and FormatError on a malformed value.
ExperimentConfig ApplySweepValue(const ExperimentConfig& base,
                                 const std::string& param,
                                 const std::string& value);

struct SweepEntry {
  std::string value;
  ExperimentResult result;
};

// One run per value in <out_dir>/<param>=<value>/ plus <out_dir>/sweep.csv.
std::vector<SweepEntry> RunSweep(const ExperimentConfig& base,
                                 const std::string& param,
                                 const std::vector<std::string>& values,
                                 const std::filesystem::path& out_dir,
                                 const ProgressFn& progress = {});

struct AblationResult {
  ExperimentResult baseline;  // no attackers
  ExperimentResult replay_on;
  ExperimentResult replay_off;
};

// Runs the benign baseline and the attack with replay on and off into
// <out_dir>/{baseline,replay_on,replay_off}/ plus <out_dir>/ablation.csv.
AblationResult RunReplayAblation(const ExperimentConfig& base,
                                 const std::filesystem::path& out_dir,
                                 const ProgressFn& progress = {});

}  // namespace fedtrigger

#endif  // FEDTRIGGER_EXPERIMENT_H_
