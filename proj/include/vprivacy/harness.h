// vprivacy/harness.h

// Copyright 2026 The vprivacy Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Verification of anonymized data under the three attack conditions:
// original enrollment and trial (oo), original enrollment with anonymized
// trial (oa), and both anonymized (aa).

#ifndef VPRIVACY_HARNESS_H_
#define VPRIVACY_HARNESS_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vprivacy/anonymizer.h"
#include "vprivacy/metrics.h"

namespace vprivacy {

enum class Condition { kOo, kOa, kAa };

const char *ConditionName(Condition c);  // "oo", "oa", "aa"
Condition ParseCondition(const std::string &s);
bool EnrollAnonymized(Condition c);
bool TrialAnonymized(Condition c);

struct Provenance {
  uint64_t seed = 0;
  std::string anon_config;  // n_farthest, n_select, assignment, tags
  std::string enroll_corpus;
  std::string trial_corpus;
  std::string pool_corpus;
};

struct EvalRun {
  std::string dataset;
  Gender gender = Gender::kFemale;
  Condition condition = Condition::kOo;
  MetricsReport metrics;
  Provenance provenance;
};

/// Replaces a whole corpus by its anonymized version.  The subset tag is
/// already set in the config.
using CorpusAnonymizer =
    std::function<Corpus(const Corpus &corpus, const AnonConfig &cfg)>;

struct HarnessOptions {
  std::string dataset = "synth";
  std::string enroll_tag = "enroll";
  std::string trial_tag = "trial";
  /// Ablation: use trial_tag for enrollment too, so aa enrollment and trial
  /// data of a speaker share one pseudo-speaker.
  bool same_tag = false;
  int jobs = 1;
  ScoringOptions scoring;
  /// Defaults to AnonymizeCorpus with the harness pool and model.
  CorpusAnonymizer anonymizer;
};

/// The enrollment and trial data one condition was scored on.
struct ConditionData {
  Corpus enroll;
  Corpus trial;
};

/// Anonymizes enrollment and/or trial data as the condition requires,
/// scores the trials and reports metrics separately for female and male
/// enrollment speakers.  A gender with no target or no nontarget trials is
/// skipped with a warning.  If `used` is given it receives the scored data.
std::vector<EvalRun> RunCondition(Condition condition, const Corpus &enroll,
                                  const Corpus &trial, const Corpus &pool,
                                  const Plda &plda, const AnonConfig &anon_cfg,
                                  const TrialList &trials,
                                  const HarnessOptions &options,
                                  std::optional<ConditionData> *used = nullptr);

/// Rows sorted by (dataset, gender, condition).
void SortRuns(std::vector<EvalRun> *runs);

/// Aligned table: dataset, gender, enroll status, trial status, EER%,
/// min_cllr, cllr.
std::string RenderReportTable(std::vector<EvalRun> runs);

/// One line per run:
/// dataset gender enroll_status trial_status eer min_cllr cllr n_tar n_non seed
std::string RenderReportRecords(std::vector<EvalRun> runs);

}  // namespace vprivacy

#endif  // VPRIVACY_HARNESS_H_
