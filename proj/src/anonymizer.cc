// vprivacy/anonymizer.cc

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

#include "vprivacy/anonymizer.h"

#include <algorithm>
#include <numeric>

namespace vprivacy {

const char *AssignmentName(Assignment a) {
  return a == Assignment::kPerSpeaker ? "per_speaker" : "per_utterance";
}

Assignment ParseAssignment(const std::string &s) {
  if (s == "per_speaker") return Assignment::kPerSpeaker;
  if (s == "per_utterance") return Assignment::kPerUtterance;
  throw Error("unknown assignment '" + s + "' (per_speaker|per_utterance)");
}

void AnonConfig::Validate(size_t pool_size) const {
  if (pool_size == 0) throw Error("anonymization pool is empty");
  if (n_select == 0) throw Error("n_select must be positive");
  if (n_select > n_farthest)
    throw Error("n_select (" + std::to_string(n_select) +
                ") exceeds n_farthest (" + std::to_string(n_farthest) + ")");
  if (n_farthest > pool_size)
    throw Error("n_farthest (" + std::to_string(n_farthest) +
                ") exceeds pool size (" + std::to_string(pool_size) + ")");
}

std::vector<size_t> TieBreakRanking(std::span<const double> distances,
                                    std::span<const std::string> ids) {
  if (distances.size() != ids.size())
    throw Error("TieBreakRanking: distances and ids differ in length");
  std::vector<size_t> order(distances.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (distances[a] != distances[b]) return distances[a] > distances[b];
    return ids[a] < ids[b];
  });
  return order;
}

AnonymizationPool::AnonymizationPool(const Corpus &pool, const Plda &plda)
    : pool_(pool), plda_(plda) {
  if (pool.dim() != plda.dim())
    throw DimensionError("pool and PLDA model dimensions differ");
  transformed_.reserve(pool.size());
  ids_.reserve(pool.size());
  for (const Embedding &e : pool.records()) {
    transformed_.push_back(plda.Transform(e.vector));
    ids_.push_back(e.utt_id);
  }
}

Eigen::VectorXd AnonymizationPool::PseudoVector(const Eigen::VectorXd &source,
                                                Gender gender,
                                                const AnonConfig &cfg,
                                                RandomStream &stream) const {
  std::vector<size_t> candidates;
  for (size_t i = 0; i < pool_.size(); i++)
    if (!cfg.same_gender_pool || pool_.records()[i].gender == gender)
      candidates.push_back(i);
  cfg.Validate(candidates.size());

  const Eigen::VectorXd u = plda_.Transform(source);
  std::vector<double> distances(candidates.size());
  std::vector<std::string> ids(candidates.size());
  for (size_t k = 0; k < candidates.size(); k++) {
    distances[k] = -plda_.TransformedLlr(u, transformed_[candidates[k]]);
    ids[k] = ids_[candidates[k]];
  }
  std::vector<size_t> ranking = TieBreakRanking(distances, ids);

  std::vector<size_t> chosen;
  for (size_t r : stream.SampleWithoutReplacement(cfg.n_farthest, cfg.n_select))
    chosen.push_back(candidates[ranking[r]]);
  // Fixed summation order: the result depends only on the chosen set.
  std::sort(chosen.begin(), chosen.end());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(source.size());
  for (size_t i : chosen) sum += pool_.records()[i].vector;
  return sum / static_cast<double>(chosen.size());
}

Embedding AnonymizeEmbedding(const Embedding &source, const Corpus &pool,
                             const Plda &plda, const AnonConfig &cfg,
                             RandomStream &stream) {
  AnonymizationPool prepared(pool, plda);
  Embedding out = source;
  out.vector = prepared.PseudoVector(source.vector, source.gender, cfg, stream);
  return out;
}

Corpus AnonymizeCorpus(const Corpus &corpus, const Corpus &pool,
                       const Plda &plda, const AnonConfig &cfg, int jobs) {
  AnonymizationPool prepared(pool, plda);
  std::vector<Embedding> records = corpus.records();

  if (cfg.assignment == Assignment::kPerUtterance) {
    ParallelFor(records.size(), jobs, [&](size_t i) {
      Embedding &e = records[i];
      RandomStream stream = RandomStream::Keyed(cfg.seed, cfg.subset_tag, e.utt_id);
      e.vector = prepared.PseudoVector(e.vector, e.gender, cfg, stream);
    });
  } else {
    std::vector<const std::pair<const std::string, std::vector<size_t>> *> groups;
    for (const auto &g : corpus.speakers()) groups.push_back(&g);
    ParallelFor(groups.size(), jobs, [&](size_t k) {
      const auto &[spk, idx] = *groups[k];
      std::vector<Eigen::VectorXd> vecs;
      for (size_t i : idx) vecs.push_back(corpus.records()[i].vector);
      RandomStream stream = RandomStream::Keyed(cfg.seed, cfg.subset_tag, spk);
      Eigen::VectorXd pseudo =
          prepared.PseudoVector(EnrollSpeaker(vecs), corpus.SpeakerGender(spk),
                                cfg, stream);
      for (size_t i : idx) records[i].vector = pseudo;
    });
  }
  return Corpus(corpus.name(), corpus.subset(), std::move(records));
}

}  // namespace vprivacy
