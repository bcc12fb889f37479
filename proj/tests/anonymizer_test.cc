// vprivacy/tests/anonymizer_test.cc

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

#include <algorithm>
#include <numeric>
#include <set>

#include "oracles.h"
#include "vprivacy/anonymizer.h"
#include "vprivacy/synthgen.h"

using namespace vprivacy;

namespace {

Eigen::VectorXd V(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  size_t i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

PldaModel IdentityModel(int d) {
  return {Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d),
          Eigen::MatrixXd::Identity(d, d)};
}

Corpus ThreePointPool() {
  return Corpus("pool", Subset::kPool,
                {{"p1", "a", Gender::kFemale, V({1, 0})},
                 {"p2", "b", Gender::kFemale, V({0, 1})},
                 {"p3", "c", Gender::kMale, V({-1, 0})}});
}

// Indices of the n farthest pool vectors by repeated argmax over the dense
// LLR, ties going to the smaller id.
std::vector<size_t> FarthestByArgmax(const PldaModel &m, const Corpus &pool,
                                     const Eigen::VectorXd &src, size_t n) {
  std::vector<bool> taken(pool.size(), false);
  std::vector<size_t> out;
  for (size_t k = 0; k < n; k++) {
    size_t best = pool.size();
    double best_d = 0;
    for (size_t i = 0; i < pool.size(); i++) {
      if (taken[i]) continue;
      double d = -oracle::DenseLlr(m, src, pool.records()[i].vector);
      if (best == pool.size() || d > best_d + 1e-9 ||
          (std::abs(d - best_d) <= 1e-9 && pool.records()[i].utt_id < pool.records()[best].utt_id)) {
        best = i;
        best_d = d;
      }
    }
    taken[best] = true;
    out.push_back(best);
  }
  return out;
}

}  // namespace

TEST_CASE("worked example on a three-point pool") {
  Plda plda(IdentityModel(2));
  Corpus pool = ThreePointPool();
  AnonConfig cfg;
  cfg.n_farthest = 2;
  cfg.n_select = 2;
  RandomStream rng(1);
  Embedding src{"u", "s", Gender::kFemale, V({1, 0})};
  Embedding out = AnonymizeEmbedding(src, pool, plda, cfg, rng);
  CHECK((out.vector - V({-0.5, 0.5})).norm() < 1e-12);
  CHECK(out.utt_id == "u");
  CHECK(out.spk_id == "s");

  cfg.n_farthest = cfg.n_select = 1;
  CHECK((AnonymizeEmbedding(src, pool, plda, cfg, rng).vector - V({-1, 0})).norm() < 1e-12);

  cfg.same_gender_pool = true;
  cfg.n_farthest = cfg.n_select = 2;
  CHECK((AnonymizeEmbedding(src, pool, plda, cfg, rng).vector - V({0.5, 0.5})).norm() < 1e-12);
  cfg.n_farthest = 3;
  CHECK_THROWS_AS(AnonymizeEmbedding(src, pool, plda, cfg, rng), Error);
}

TEST_CASE("configuration validation") {
  AnonConfig cfg;
  cfg.n_farthest = 4;
  cfg.n_select = 2;
  CHECK_NOTHROW(cfg.Validate(4));
  CHECK_THROWS_AS(cfg.Validate(3), Error);
  CHECK_THROWS_AS(cfg.Validate(0), Error);
  cfg.n_select = 5;
  CHECK_THROWS_AS(cfg.Validate(10), Error);
  cfg.n_select = 0;
  CHECK_THROWS_AS(cfg.Validate(10), Error);
  CHECK(ParseAssignment("per_speaker") == Assignment::kPerSpeaker);
  CHECK(ParseAssignment("per_utterance") == Assignment::kPerUtterance);
  CHECK(std::string(AssignmentName(Assignment::kPerUtterance)) == "per_utterance");
  CHECK_THROWS_AS(ParseAssignment("per_word"), Error);
}

TEST_CASE("tie-break ranking") {
  std::vector<double> d = {1.0, 3.0, 3.0, 2.0, 3.0};
  std::vector<std::string> ids = {"e", "c", "a", "d", "b"};
  CHECK(TieBreakRanking(d, ids) == std::vector<size_t>{2, 4, 1, 3, 0});

  RandomStream rng(2);
  for (int c = 0; c < 50; c++) {
    size_t n = 1 + rng.Below(9);
    std::vector<double> dist(n);
    std::vector<std::string> names(n);
    for (size_t i = 0; i < n; i++) {
      dist[i] = static_cast<double>(rng.Below(3));
      names[i] = "id" + std::to_string(i);
    }
    std::vector<size_t> order = TieBreakRanking(dist, names);
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    rng.Shuffle(&perm);
    std::vector<double> pd(n);
    std::vector<std::string> pn(n);
    for (size_t i = 0; i < n; i++) {
      pd[i] = dist[perm[i]];
      pn[i] = names[perm[i]];
    }
    std::vector<size_t> porder = TieBreakRanking(pd, pn);
    for (size_t i = 0; i < n; i++) CHECK(perm[porder[i]] == order[i]);
    for (size_t i = 1; i < n; i++) {
      CHECK(dist[order[i - 1]] >= dist[order[i]]);
      if (dist[order[i - 1]] == dist[order[i]]) CHECK(names[order[i - 1]] < names[order[i]]);
    }
  }
}

TEST_CASE("farthest-set averaging agrees with a repeated-argmax oracle") {
  RandomStream rng(3);
  for (int c = 0; c < 30; c++) {
    int d = 1 + static_cast<int>(rng.Below(3));
    PldaModel m{oracle::RandomVector(d, rng), oracle::RandomSpd(d, rng, 0.1),
                oracle::RandomSpd(d, rng, 0.2)};
    Plda plda(m);
    std::vector<Embedding> recs;
    for (int i = 0; i < 12; i++)
      recs.push_back({"p" + std::to_string(10 + i), "s" + std::to_string(i), Gender::kMale,
                      m.mean + oracle::RandomVector(d, rng, 2.0)});
    Corpus pool("pool", Subset::kPool, recs);
    Eigen::VectorXd src = m.mean + oracle::RandomVector(d, rng, 2.0);
    size_t n = 1 + rng.Below(12);
    AnonConfig cfg;
    cfg.n_farthest = cfg.n_select = n;
    RandomStream s(4);
    Eigen::VectorXd got = AnonymizationPool(pool, plda).PseudoVector(src, Gender::kMale, cfg, s);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(d);
    for (size_t i : FarthestByArgmax(m, pool, src, n)) want += pool.records()[i].vector;
    want /= static_cast<double>(n);
    CHECK((got - want).norm() < 1e-9);
  }
}

TEST_CASE("random subset stays inside the farthest set's convex hull") {
  RandomStream rng(5);
  Plda plda(IdentityModel(1));
  std::vector<Embedding> recs;
  for (int i = 0; i < 30; i++)
    recs.push_back({"p" + std::to_string(100 + i), "s", Gender::kMale,
                    V({static_cast<double>(i) - 15.0})});
  Corpus pool("pool", Subset::kPool, recs);
  AnonConfig cfg;
  cfg.n_farthest = 10;
  cfg.n_select = 3;
  std::vector<Eigen::VectorXd> farthest;
  for (size_t i : FarthestByArgmax(IdentityModel(1), pool, V({14}), 10))
    farthest.push_back(pool.records()[i].vector);
  double lo = 1e9, hi = -1e9;
  for (const auto &f : farthest) {
    lo = std::min(lo, f(0));
    hi = std::max(hi, f(0));
  }
  for (int k = 0; k < 100; k++) {
    RandomStream s = RandomStream::Keyed(k, "hull", "x");
    double v = AnonymizationPool(pool, plda).PseudoVector(V({14}), Gender::kMale, cfg, s)(0);
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("per-speaker assignment, determinism and tag separation") {
  GeneratedCorpus gen = Generate(GenSpec::Default(7, 8));
  CorpusSplit split = Split(gen.corpus, {0.0, 0.5, 0.2, 0.3}, 7);
  Plda plda(gen.truth);
  const Corpus &trial = *split.trial;
  AnonConfig cfg;
  cfg.n_farthest = 50;
  cfg.n_select = 10;
  Corpus a = AnonymizeCorpus(trial, *split.pool, plda, cfg, 1);
  Corpus b = AnonymizeCorpus(trial, *split.pool, plda, cfg, 3);
  REQUIRE(a.size() == trial.size());
  for (size_t i = 0; i < a.size(); i++) {
    CHECK(a.records()[i].vector == b.records()[i].vector);
    CHECK(a.records()[i].utt_id == trial.records()[i].utt_id);
    CHECK(a.records()[i].gender == trial.records()[i].gender);
  }
  for (const auto &[spk, idx] : a.speakers())
    for (size_t i : idx) CHECK(a.records()[i].vector == a.records()[idx[0]].vector);

  AnonConfig other = cfg;
  other.subset_tag = "enroll";
  Corpus c = AnonymizeCorpus(trial, *split.pool, plda, other, 1);
  size_t differ = 0;
  for (size_t i = 0; i < c.size(); i++) differ += c.records()[i].vector != a.records()[i].vector;
  CHECK(differ > c.size() / 2);

  other = cfg;
  other.seed = 8;
  Corpus d = AnonymizeCorpus(trial, *split.pool, plda, other, 1);
  differ = 0;
  for (size_t i = 0; i < d.size(); i++) differ += d.records()[i].vector != a.records()[i].vector;
  CHECK(differ > d.size() / 2);

  other = cfg;
  other.assignment = Assignment::kPerUtterance;
  Corpus e = AnonymizeCorpus(trial, *split.pool, plda, other, 2);
  std::set<std::vector<double>> distinct;
  for (const Embedding &r : e.records())
    distinct.insert(std::vector<double>(r.vector.data(), r.vector.data() + r.vector.size()));
  CHECK(distinct.size() > e.size() / 2);
}

TEST_CASE("a speaker with three identical utterances gets one pseudo-vector") {
  Plda plda(IdentityModel(2));
  Corpus corpus("t", Subset::kTrial,
                {{"u1", "s", Gender::kFemale, V({1, 0})},
                 {"u2", "s", Gender::kFemale, V({1, 0})},
                 {"u3", "s", Gender::kFemale, V({1, 0})}});
  AnonConfig cfg;
  cfg.n_farthest = 2;
  cfg.n_select = 1;
  Corpus out = AnonymizeCorpus(corpus, ThreePointPool(), plda, cfg);
  CHECK(out.records()[0].vector == out.records()[1].vector);
  CHECK(out.records()[1].vector == out.records()[2].vector);
}

TEST_CASE("pseudo-vectors are far from their source") {
  GeneratedCorpus gen = Generate(GenSpec::Default(9, 8));
  CorpusSplit split = Split(gen.corpus, {0.0, 0.6, 0.1, 0.3}, 9);
  Plda plda(gen.truth);
  const Corpus &pool = *split.pool;
  AnonConfig cfg;
  cfg.n_farthest = 200;
  cfg.n_select = 100;
  Corpus out = AnonymizeCorpus(*split.trial, pool, plda, cfg);
  double mean = 0;
  for (size_t i = 0; i < out.size(); i++)
    mean += plda.Distance(out.records()[i].vector, split.trial->records()[i].vector);
  mean /= static_cast<double>(out.size());
  std::vector<double> pairwise;
  for (size_t i = 0; i < pool.size(); i += 3)
    for (size_t j = i + 1; j < pool.size(); j += 3)
      pairwise.push_back(plda.Distance(pool.records()[i].vector, pool.records()[j].vector));
  std::nth_element(pairwise.begin(), pairwise.begin() + pairwise.size() / 2, pairwise.end());
  CHECK(mean > pairwise[pairwise.size() / 2]);
}

TEST_CASE("the whole pool averages to the pool mean for any seed") {
  GeneratedCorpus gen = Generate(GenSpec::Default(10, 4));
  CorpusSplit split = Split(gen.corpus, {0.0, 0.5, 0.2, 0.3}, 10);
  Plda plda(gen.truth);
  const Corpus &pool = *split.pool;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  for (const Embedding &e : pool.records()) mean += e.vector;
  mean /= static_cast<double>(pool.size());
  AnonConfig cfg;
  cfg.n_farthest = cfg.n_select = pool.size();
  for (uint64_t seed : {0, 1, 2}) {
    cfg.seed = seed;
    Corpus out = AnonymizeCorpus(*split.trial, pool, plda, cfg);
    for (const Embedding &e : out.records()) CHECK((e.vector - mean).norm() < 1e-9);
  }
}

TEST_CASE("dimension mismatch between pool and model") {
  Plda plda(IdentityModel(3));
  CHECK_THROWS_AS(AnonymizationPool(ThreePointPool(), plda), DimensionError);
}
