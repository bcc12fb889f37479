// vprivacy/harness.cc

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

#include "vprivacy/harness.h"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace vprivacy {

const char *ConditionName(Condition c) {
  switch (c) {
    case Condition::kOo: return "oo";
    case Condition::kOa: return "oa";
    case Condition::kAa: return "aa";
  }
  return "?";
}

Condition ParseCondition(const std::string &s) {
  if (s == "oo") return Condition::kOo;
  if (s == "oa") return Condition::kOa;
  if (s == "aa") return Condition::kAa;
  throw Error("unknown condition '" + s + "' (expected oo, oa or aa)");
}

bool EnrollAnonymized(Condition c) { return c == Condition::kAa; }
bool TrialAnonymized(Condition c) { return c != Condition::kOo; }

namespace {

const char *Status(bool anonymized) {
  return anonymized ? "anonymized" : "original";
}

std::string DescribeAnon(const AnonConfig &cfg, const std::string &enroll_tag,
                         const std::string &trial_tag) {
  std::ostringstream os;
  os << "n_farthest=" << cfg.n_farthest << " n_select=" << cfg.n_select
     << " assignment=" << AssignmentName(cfg.assignment)
     << " same_gender_pool=" << (cfg.same_gender_pool ? "true" : "false")
     << " enroll_tag=" << enroll_tag << " trial_tag=" << trial_tag;
  return os.str();
}

}  // namespace

std::vector<EvalRun> RunCondition(Condition condition, const Corpus &enroll,
                                  const Corpus &trial, const Corpus &pool,
                                  const Plda &plda, const AnonConfig &anon_cfg,
                                  const TrialList &trials,
                                  const HarnessOptions &options,
                                  std::optional<ConditionData> *used) {
  CorpusAnonymizer anonymize = options.anonymizer;
  if (!anonymize) {
    anonymize = [&](const Corpus &c, const AnonConfig &cfg) {
      return AnonymizeCorpus(c, pool, plda, cfg, options.jobs);
    };
  }
  const std::string enroll_tag =
      options.same_tag ? options.trial_tag : options.enroll_tag;

  std::optional<Corpus> anon_enroll, anon_trial;
  if (EnrollAnonymized(condition)) {
    AnonConfig cfg = anon_cfg;
    cfg.subset_tag = enroll_tag;
    anon_enroll = anonymize(enroll, cfg);
  }
  if (TrialAnonymized(condition)) {
    AnonConfig cfg = anon_cfg;
    cfg.subset_tag = options.trial_tag;
    anon_trial = anonymize(trial, cfg);
  }
  const Corpus &scored_enroll = anon_enroll ? *anon_enroll : enroll;
  const Corpus &scored_trial = anon_trial ? *anon_trial : trial;

  ScoringOptions scoring = options.scoring;
  scoring.jobs = options.jobs;
  ScoreSet scores = ScoreTrials(plda, scored_enroll, scored_trial, trials, scoring);

  Provenance prov;
  prov.seed = anon_cfg.seed;
  prov.anon_config = DescribeAnon(anon_cfg, enroll_tag, options.trial_tag);
  prov.enroll_corpus = enroll.name();
  prov.trial_corpus = trial.name();
  prov.pool_corpus = pool.name();

  std::vector<EvalRun> runs;
  for (Gender g : {Gender::kFemale, Gender::kMale}) {
    std::vector<double> tar, non;
    for (const ScoredTrial &s : scores.entries()) {
      if (enroll.SpeakerGender(s.enroll_spk) != g) continue;
      (*s.label == TrialLabel::kTarget ? tar : non).push_back(s.score);
    }
    if (tar.empty() || non.empty()) {
      if (!tar.empty() || !non.empty())
        Warn(std::string("condition ") + ConditionName(condition) +
             ", gender " + GenderChar(g) +
             ": missing target or nontarget trials, skipped");
      continue;
    }
    EvalRun run;
    run.dataset = options.dataset;
    run.gender = g;
    run.condition = condition;
    run.metrics = ComputeMetrics(tar, non);
    run.provenance = prov;
    runs.push_back(std::move(run));
  }
  if (used != nullptr)
    used->emplace(ConditionData{scored_enroll, scored_trial});
  return runs;
}

void SortRuns(std::vector<EvalRun> *runs) {
  std::stable_sort(runs->begin(), runs->end(),
                   [](const EvalRun &a, const EvalRun &b) {
                     return std::tie(a.dataset, a.gender, a.condition) <
                            std::tie(b.dataset, b.gender, b.condition);
                   });
}

std::string RenderReportTable(std::vector<EvalRun> runs) {
  SortRuns(&runs);
  const std::vector<std::string> header = {"dataset", "gender", "enroll",
                                           "trial",   "EER%",   "min_cllr",
                                           "cllr"};
  std::vector<std::vector<std::string>> rows;
  bool has_aa = false;
  for (const EvalRun &r : runs) {
    has_aa |= r.condition == Condition::kAa;
    rows.push_back({r.dataset, std::string(1, GenderChar(r.gender)),
                    Status(EnrollAnonymized(r.condition)),
                    Status(TrialAnonymized(r.condition)),
                    FormatFixed(100.0 * r.metrics.eer, 2),
                    FormatFixed(r.metrics.min_cllr, 3),
                    FormatFixed(r.metrics.cllr, 3)});
  }
  std::vector<size_t> width(header.size());
  for (size_t c = 0; c < header.size(); c++) {
    width[c] = header[c].size();
    for (const auto &row : rows) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string> &row) {
    for (size_t c = 0; c < row.size(); c++) {
      // Text columns left-aligned, numeric columns right-aligned.
      bool numeric = c >= 4;
      std::string pad(width[c] - row[c].size(), ' ');
      if (c > 0) os << "  ";
      os << (numeric ? pad + row[c] : row[c] + (c + 1 < row.size() ? pad : ""));
    }
    os << '\n';
  };
  emit(header);
  for (const auto &row : rows) emit(row);
  if (has_aa)
    os << "# note: aa anonymizes embeddings only; there is no F0 or bottleneck "
          "feature path that could leak speaker identity, so aa figures are "
          "not comparable with waveform-level systems\n";
  return os.str();
}

std::string RenderReportRecords(std::vector<EvalRun> runs) {
  SortRuns(&runs);
  std::ostringstream os;
  for (const EvalRun &r : runs) {
    os << r.dataset << ' ' << GenderChar(r.gender) << ' '
       << Status(EnrollAnonymized(r.condition)) << ' '
       << Status(TrialAnonymized(r.condition)) << ' '
       << FormatFixed(r.metrics.eer, 6) << ' '
       << FormatFixed(r.metrics.min_cllr, 6) << ' '
       << FormatFixed(r.metrics.cllr, 6) << ' ' << r.metrics.n_target << ' '
       << r.metrics.n_nontarget << ' ' << r.provenance.seed << '\n';
  }
  return os.str();
}

}  // namespace vprivacy
