// vprivacy/tests/harness_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "vprivacy/harness.h"
#include "vprivacy/synthgen.h"

using namespace vprivacy;

namespace {

struct Fixture {
  CorpusSplit split;
  PldaModel model;
  TrialList trials;

  explicit Fixture(uint64_t seed) {
    GenSpec spec = GenSpec::Default(seed, 8);
    spec.n_speakers = 80;
    split = Split(Generate(spec).corpus, {0.4, 0.3, 0.1, 0.2}, seed);
    model = TrainPlda(*split.train, 10).model;
    trials = MakeTrials(*split.enroll, *split.trial, TrialPolicy{});
  }
};

AnonConfig SmallAnon() {
  AnonConfig cfg;
  cfg.n_farthest = 60;
  cfg.n_select = 30;
  return cfg;
}

EvalRun MakeRun(const std::string &dataset, Gender g, Condition c, double eer) {
  EvalRun r;
  r.dataset = dataset;
  r.gender = g;
  r.condition = c;
  r.metrics.eer = eer;
  r.metrics.min_cllr = 0.25;
  r.metrics.cllr = 1.5;
  r.metrics.n_target = 3;
  r.metrics.n_nontarget = 7;
  r.provenance.seed = 4;
  return r;
}

}  // namespace

TEST_CASE("condition names and statuses") {
  CHECK(std::string(ConditionName(Condition::kOa)) == "oa");
  CHECK(ParseCondition("aa") == Condition::kAa);
  CHECK_THROWS_AS(ParseCondition("ao"), Error);
  CHECK(!EnrollAnonymized(Condition::kOo));
  CHECK(!TrialAnonymized(Condition::kOo));
  CHECK(!EnrollAnonymized(Condition::kOa));
  CHECK(TrialAnonymized(Condition::kOa));
  CHECK(EnrollAnonymized(Condition::kAa));
  CHECK(TrialAnonymized(Condition::kAa));
}

TEST_CASE("oo equals direct scoring and never calls the anonymizer") {
  Fixture f(1);
  Plda plda(f.model);
  std::map<std::string, int> calls;
  HarnessOptions opts;
  opts.anonymizer = [&](const Corpus &c, const AnonConfig &cfg) {
    calls[cfg.subset_tag]++;
    return AnonymizeCorpus(c, *f.split.pool, plda, cfg);
  };
  std::vector<EvalRun> runs = RunCondition(Condition::kOo, *f.split.enroll, *f.split.trial,
                                           *f.split.pool, plda, SmallAnon(), f.trials, opts);
  CHECK(calls.empty());
  REQUIRE(runs.size() == 2);

  ScoreSet direct = ScoreTrials(plda, *f.split.enroll, *f.split.trial, f.trials);
  for (const EvalRun &run : runs) {
    std::vector<double> tar, non;
    for (const ScoredTrial &s : direct.entries()) {
      if (f.split.enroll->SpeakerGender(s.enroll_spk) != run.gender) continue;
      (f.trials.Find(s.enroll_spk, s.test_utt)->label == TrialLabel::kTarget ? tar : non)
          .push_back(s.score);
    }
    MetricsReport m = ComputeMetrics(tar, non);
    CHECK(run.metrics.eer == m.eer);
    CHECK(run.metrics.cllr == m.cllr);
    CHECK(run.metrics.min_cllr == m.min_cllr);
    CHECK(run.metrics.n_target == m.n_target);
    CHECK(run.metrics.n_nontarget == m.n_nontarget);
    CHECK(run.condition == Condition::kOo);
    CHECK(run.dataset == "synth");
    CHECK(run.provenance.enroll_corpus == "enroll");
    CHECK(run.provenance.trial_corpus == "trial");
    CHECK(run.provenance.pool_corpus == "pool");
  }

  RunCondition(Condition::kOa, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
               SmallAnon(), f.trials, opts);
  CHECK(calls == std::map<std::string, int>{{"trial", 1}});
  RunCondition(Condition::kAa, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
               SmallAnon(), f.trials, opts);
  CHECK(calls == std::map<std::string, int>{{"enroll", 1}, {"trial", 2}});
  opts.same_tag = true;
  RunCondition(Condition::kAa, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
               SmallAnon(), f.trials, opts);
  CHECK(calls == std::map<std::string, int>{{"enroll", 1}, {"trial", 4}});
}

TEST_CASE("oa with the full selection is seed independent") {
  Fixture f(2);
  Plda plda(f.model);
  AnonConfig cfg = SmallAnon();
  cfg.n_select = cfg.n_farthest;
  std::vector<double> eers;
  for (uint64_t seed : {0, 1, 99}) {
    cfg.seed = seed;
    for (const EvalRun &r : RunCondition(Condition::kOa, *f.split.enroll, *f.split.trial,
                                         *f.split.pool, plda, cfg, f.trials, {}))
      eers.push_back(r.metrics.eer);
  }
  REQUIRE(eers.size() == 6);
  CHECK(eers[0] == eers[2]);
  CHECK(eers[0] == eers[4]);
  CHECK(eers[1] == eers[3]);
  CHECK(eers[1] == eers[5]);
}

TEST_CASE("anonymized trials raise the EER") {
  Fixture f(3);
  Plda plda(f.model);
  std::optional<ConditionData> used;
  auto oo = RunCondition(Condition::kOo, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
                         SmallAnon(), f.trials, {}, &used);
  REQUIRE(used);
  CHECK(used->trial.records()[0].vector == f.split.trial->records()[0].vector);
  auto oa = RunCondition(Condition::kOa, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
                         SmallAnon(), f.trials, {}, &used);
  CHECK(used->enroll.records()[0].vector == f.split.enroll->records()[0].vector);
  CHECK(used->trial.records()[0].vector != f.split.trial->records()[0].vector);
  REQUIRE(oo.size() == oa.size());
  for (size_t i = 0; i < oo.size(); i++) CHECK(oo[i].metrics.eer < oa[i].metrics.eer);
}

TEST_CASE("same-tag ablation draws enrollment and trial from one stream") {
  Fixture f(4);
  Plda plda(f.model);
  // Identical enrollment and trial data isolate the effect of the tag.
  const Corpus &data = *f.split.trial;
  std::optional<ConditionData> distinct, shared;
  RunCondition(Condition::kAa, data, data, *f.split.pool, plda, SmallAnon(), f.trials, {},
               &distinct);
  HarnessOptions opts;
  opts.same_tag = true;
  auto shared_runs = RunCondition(Condition::kAa, data, data, *f.split.pool, plda, SmallAnon(),
                                  f.trials, opts, &shared);
  size_t same_distinct = 0, same_shared = 0;
  for (size_t i = 0; i < data.size(); i++) {
    same_distinct += distinct->enroll.records()[i].vector == distinct->trial.records()[i].vector;
    same_shared += shared->enroll.records()[i].vector == shared->trial.records()[i].vector;
  }
  CHECK(same_shared == data.size());
  CHECK(same_distinct < data.size() / 2);
  for (const EvalRun &r : shared_runs)
    CHECK(r.provenance.anon_config.find("enroll_tag=trial") != std::string::npos);
}

TEST_CASE("per-gender EER differs from the pooled EER") {
  // Each gender separates perfectly on its own, at different offsets.
  std::vector<double> f_tar = {1, 2}, f_non = {0}, m_tar = {11, 12}, m_non = {10};
  CHECK(ComputeEer(f_tar, f_non).eer == 0.0);
  CHECK(ComputeEer(m_tar, m_non).eer == 0.0);
  std::vector<double> tar = {1, 2, 11, 12}, non = {0, 10};
  CHECK(ComputeEer(tar, non).eer > 0.0);
}

TEST_CASE("a gender without targets is skipped with a warning") {
  Fixture f(5);
  Plda plda(f.model);
  std::vector<Trial> only_f;
  for (const Trial &t : f.trials.entries())
    if (f.split.enroll->SpeakerGender(t.enroll_spk) == Gender::kFemale ||
        t.label == TrialLabel::kNontarget)
      only_f.push_back(t);
  std::vector<std::string> warnings;
  WarningHandler old = SetWarningHandler([&](const std::string &m) { warnings.push_back(m); });
  auto runs = RunCondition(Condition::kOo, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
                           SmallAnon(), TrialList(only_f), {});
  SetWarningHandler(old);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].gender == Gender::kFemale);
  CHECK(warnings.size() == 1);
}

TEST_CASE("report table") {
  std::vector<EvalRun> runs = {MakeRun("b", Gender::kFemale, Condition::kOa, 0.5),
                               MakeRun("a", Gender::kMale, Condition::kOo, 0.01234),
                               MakeRun("a", Gender::kFemale, Condition::kOa, 0.4),
                               MakeRun("a", Gender::kFemale, Condition::kOo, 0.02)};
  std::vector<EvalRun> sorted = runs;
  SortRuns(&sorted);
  CHECK(sorted[0].dataset == "a");
  CHECK(sorted[0].gender == Gender::kFemale);
  CHECK(sorted[0].condition == Condition::kOo);
  CHECK(sorted[1].condition == Condition::kOa);
  CHECK(sorted[2].gender == Gender::kMale);
  CHECK(sorted[3].dataset == "b");

  CHECK(RenderReportTable(runs) ==
        "dataset  gender  enroll    trial        EER%  min_cllr   cllr\n"
        "a        F       original  original     2.00     0.250  1.500\n"
        "a        F       original  anonymized  40.00     0.250  1.500\n"
        "a        M       original  original     1.23     0.250  1.500\n"
        "b        F       original  anonymized  50.00     0.250  1.500\n");

  std::string one = RenderReportTable({MakeRun("x", Gender::kMale, Condition::kAa, 0.5)});
  std::istringstream lines(one);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  REQUIRE(all.size() == 3);
  CHECK(all[1].find("anonymized  anonymized") != std::string::npos);
  CHECK(all[2].rfind("# note: aa", 0) == 0);
}

TEST_CASE("report records") {
  std::vector<EvalRun> runs = {MakeRun("b", Gender::kFemale, Condition::kAa, 0.5),
                               MakeRun("a", Gender::kMale, Condition::kOo, 0.01234)};
  CHECK(RenderReportRecords(runs) ==
        "a M original original 0.012340 0.250000 1.500000 3 7 4\n"
        "b F anonymized anonymized 0.500000 0.250000 1.500000 3 7 4\n");
}

TEST_CASE("identical inputs give identical report bytes") {
  Fixture f(6);
  Plda plda(f.model);
  auto render = [&] {
    std::vector<EvalRun> runs;
    for (Condition c : {Condition::kOo, Condition::kOa, Condition::kAa}) {
      HarnessOptions opts;
      opts.jobs = c == Condition::kAa ? 3 : 1;
      auto r = RunCondition(c, *f.split.enroll, *f.split.trial, *f.split.pool, plda,
                            SmallAnon(), f.trials, opts);
      runs.insert(runs.end(), r.begin(), r.end());
    }
    return RenderReportTable(runs) + RenderReportRecords(runs);
  };
  CHECK(render() == render());
}
