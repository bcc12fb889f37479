// vprivacy/tests/synthgen_test.cc

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

#include <set>

#include "vprivacy/metrics.h"
#include "vprivacy/synthgen.h"

using namespace vprivacy;

namespace {

std::set<std::string> Speakers(const std::optional<Corpus> &c) {
  std::set<std::string> out;
  if (c)
    for (const Embedding &e : c->records()) out.insert(e.spk_id);
  return out;
}

std::set<std::string> Utterances(const std::optional<Corpus> &c) {
  std::set<std::string> out;
  if (c)
    for (const Embedding &e : c->records()) out.insert(e.utt_id);
  return out;
}

bool Disjoint(const std::set<std::string> &a, const std::set<std::string> &b) {
  for (const std::string &x : a)
    if (b.count(x)) return false;
  return true;
}

}  // namespace

TEST_CASE("default generator settings") {
  GenSpec spec = GenSpec::Default(3);
  CHECK(spec.n_speakers == 200);
  CHECK(spec.utts_per_speaker == 10);
  CHECK(spec.dim() == 32);
  CHECK(spec.within.isApprox(Eigen::MatrixXd::Identity(32, 32)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.between);
  CHECK(std::abs(eig.eigenvalues()(0) - 0.5) < 1e-9);
  CHECK(std::abs(eig.eigenvalues()(31) - 2.0) < 1e-9);
  CHECK((spec.between - spec.between.transpose()).norm() < 1e-12);
  CHECK(GenSpec::Default(3).between == spec.between);
  CHECK(GenSpec::Default(4).between != spec.between);
}

TEST_CASE("generated corpus layout and determinism") {
  GenSpec spec = GenSpec::Default(5, 4);
  spec.n_speakers = 12;
  spec.utts_per_speaker = 3;
  spec.female_fraction = 0.25;
  GeneratedCorpus a = Generate(spec), b = Generate(spec);
  REQUIRE(a.corpus.size() == 36);
  CHECK(a.corpus.speakers().size() == 12);
  size_t female = 0;
  for (const auto &[spk, idx] : a.corpus.speakers()) {
    CHECK(idx.size() == 3);
    female += a.corpus.SpeakerGender(spk) == Gender::kFemale;
  }
  CHECK(female == 3);
  for (size_t i = 0; i < a.corpus.size(); i++) {
    CHECK(a.corpus.records()[i].utt_id == b.corpus.records()[i].utt_id);
    CHECK(a.corpus.records()[i].vector == b.corpus.records()[i].vector);
  }
  CHECK(a.truth.mean.isZero());
  CHECK(a.truth.between == spec.between);
  CHECK(a.truth.within == spec.within);
  spec.seed = 6;
  CHECK(Generate(spec).corpus.records()[0].vector != a.corpus.records()[0].vector);
}

TEST_CASE("zero within-speaker covariance gives identical utterances") {
  GenSpec spec = GenSpec::Default(7, 3);
  spec.n_speakers = 10;
  spec.within = Eigen::MatrixXd::Zero(3, 3);
  GeneratedCorpus g = Generate(spec);
  for (const auto &[spk, idx] : g.corpus.speakers())
    for (size_t i : idx) CHECK(g.corpus.records()[i].vector == g.corpus.records()[idx[0]].vector);
}

TEST_CASE("speaker-mean covariance approaches B + W / n") {
  GenSpec spec = GenSpec::Default(8, 3);
  spec.n_speakers = 500;
  GeneratedCorpus g = Generate(spec);
  std::vector<Eigen::VectorXd> means;
  for (const auto &[spk, idx] : g.corpus.speakers()) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(3);
    for (size_t i : idx) m += g.corpus.records()[i].vector;
    means.push_back(m / static_cast<double>(idx.size()));
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
  for (const auto &m : means) cov += m * m.transpose();
  cov /= static_cast<double>(means.size());
  Eigen::MatrixXd expected = spec.between + spec.within / 10.0;
  // Relative sampling error of a 500-sample covariance is about sqrt(2/500).
  CHECK((cov - expected).norm() <= 0.15 * expected.norm());
}

TEST_CASE("speaker labels without between-speaker variance give chance EER") {
  GenSpec spec = GenSpec::Default(9, 8);
  spec.between = Eigen::MatrixXd::Zero(8, 8);
  GeneratedCorpus g = Generate(spec);
  CorpusSplit s = Split(g.corpus, {0.4, 0.3, 0.1, 0.2}, 9);
  Plda plda(TrainPlda(*s.train, 10).model);
  TrialPolicy policy;
  policy.max_nontargets = 2000 - 420;
  TrialList trials = MakeTrials(*s.enroll, *s.trial, policy);
  CHECK(trials.size() == 2000);
  ScoreSet scores = AttachLabels(ScoreTrials(plda, *s.enroll, *s.trial, trials), trials);
  double eer = ComputeMetrics(scores).eer;
  CHECK(eer >= 0.45);
  CHECK(eer <= 0.55);
}

TEST_CASE("invalid specs are rejected") {
  GenSpec spec = GenSpec::Default(10, 3);
  spec.between(0, 0) = -1.0;
  CHECK_THROWS_AS(Generate(spec), Error);
  spec = GenSpec::Default(10, 3);
  spec.within(0, 1) = 0.3;
  CHECK_THROWS_AS(Generate(spec), Error);
  spec = GenSpec::Default(10, 3);
  spec.within = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(Generate(spec), DimensionError);
  spec = GenSpec::Default(10, 3);
  spec.n_speakers = 0;
  CHECK_THROWS_AS(Generate(spec), Error);
  spec = GenSpec::Default(10, 3);
  spec.female_fraction = 1.5;
  CHECK_THROWS_AS(Generate(spec), Error);
}

TEST_CASE("split set algebra") {
  GenSpec spec = GenSpec::Default(11, 3);
  spec.n_speakers = 10;
  GeneratedCorpus g = Generate(spec);
  CorpusSplit s = Split(g.corpus, {0.5, 0.2, 0.1, 0.2}, 11);
  REQUIRE(s.train);
  REQUIRE(s.pool);
  REQUIRE(s.enroll);
  REQUIRE(s.trial);
  CHECK(Speakers(s.train).size() == 5);
  CHECK(Speakers(s.pool).size() == 2);
  CHECK(Speakers(s.enroll) == Speakers(s.trial));
  CHECK(Speakers(s.trial).size() == 3);
  CHECK(Disjoint(Speakers(s.train), Speakers(s.pool)));
  CHECK(Disjoint(Speakers(s.train), Speakers(s.trial)));
  CHECK(Disjoint(Speakers(s.pool), Speakers(s.trial)));
  CHECK(Disjoint(Utterances(s.enroll), Utterances(s.trial)));
  CHECK(s.train->size() + s.pool->size() + s.enroll->size() + s.trial->size() == 100);
  CHECK(s.enroll->size() + s.trial->size() == 30);
  for (const auto &[spk, idx] : s.enroll->speakers()) CHECK(!idx.empty());
  CHECK(s.train->subset() == Subset::kTraining);
  CHECK(s.pool->subset() == Subset::kPool);
  CHECK(s.enroll->subset() == Subset::kEnrollment);
  CHECK(s.trial->subset() == Subset::kTrial);

  CorpusSplit t = Split(g.corpus, {0.5, 0.2, 0.1, 0.2}, 11);
  CHECK(Utterances(t.enroll) == Utterances(s.enroll));
  CHECK(Utterances(t.train) == Utterances(s.train));
  CorpusSplit u = Split(g.corpus, {0.5, 0.2, 0.1, 0.2}, 12);
  CHECK((Utterances(u.train) != Utterances(s.train) ||
         Utterances(u.enroll) != Utterances(s.enroll)));

  CorpusSplit all = Split(g.corpus, {1, 0, 0, 0}, 11);
  REQUIRE(all.train);
  CHECK(all.train->size() == 100);
  CHECK(!all.pool);
  CHECK(!all.enroll);
  CHECK(!all.trial);
}

TEST_CASE("split preconditions") {
  GenSpec spec = GenSpec::Default(13, 3);
  spec.n_speakers = 10;
  GeneratedCorpus g = Generate(spec);
  CHECK_THROWS_AS(Split(g.corpus, {0.5, 0.2, 0.1, 0.1}, 1), Error);
  CHECK_THROWS_AS(Split(g.corpus, {0.5, 0.6, -0.1, 0.0}, 1), Error);
  spec.utts_per_speaker = 1;
  GeneratedCorpus single = Generate(spec);
  CHECK_THROWS_AS(Split(single.corpus, {0.5, 0.2, 0.1, 0.2}, 1), Error);
  CHECK_NOTHROW(Split(single.corpus, {0.5, 0.5, 0.0, 0.0}, 1));
}
