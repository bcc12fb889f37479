// vprivacy/anonymizer.h

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

#ifndef VPRIVACY_ANONYMIZER_H_
#define VPRIVACY_ANONYMIZER_H_

#include <span>
#include <string>
#include <vector>

#include "vprivacy/embedding_io.h"
#include "vprivacy/plda.h"

namespace vprivacy {

enum class Assignment { kPerUtterance, kPerSpeaker };

const char *AssignmentName(Assignment a);
Assignment ParseAssignment(const std::string &s);

/// Pseudo-speaker selection: rank the pool by PLDA distance to the source,
/// keep the n_farthest, and average n_select of them drawn at random.
struct AnonConfig {
  size_t n_farthest = 200;
  size_t n_select = 100;
  Assignment assignment = Assignment::kPerSpeaker;
  uint64_t seed = 0;
  /// Salts the random stream, so e.g. "enroll" and "trial" data of one
  /// speaker map to different pseudo-speakers.
  std::string subset_tag = "trial";
  bool same_gender_pool = false;

  /// Throws unless 1 <= n_select <= n_farthest <= pool_size.
  void Validate(size_t pool_size) const;
};

/// Indices sorted by descending distance; equal distances are ordered by
/// ascending id.  ids.size() must equal distances.size().
std::vector<size_t> TieBreakRanking(std::span<const double> distances,
                                    std::span<const std::string> ids);

/// Pre-transformed pool, shared by all anonymizations against one model.
class AnonymizationPool {
 public:
  AnonymizationPool(const Corpus &pool, const Plda &plda);

  const Corpus &corpus() const { return pool_; }
  const Plda &plda() const { return plda_; }

  /// Pseudo-vector for `source` using `stream` for the random selection.
  Eigen::VectorXd PseudoVector(const Eigen::VectorXd &source, Gender gender,
                               const AnonConfig &cfg,
                               RandomStream &stream) const;

 private:
  const Corpus &pool_;
  const Plda &plda_;
  std::vector<Eigen::VectorXd> transformed_;
  std::vector<std::string> ids_;
};

/// Replaces the source vector with its pseudo-vector; ids and gender are
/// copied from the source.
Embedding AnonymizeEmbedding(const Embedding &source, const Corpus &pool,
                             const Plda &plda, const AnonConfig &cfg,
                             RandomStream &stream);

/// per_speaker: the source is the speaker's mean embedding, the stream is
/// keyed by (seed, subset_tag, spk_id), and every utterance of the speaker
/// gets the same pseudo-vector.  per_utterance: each utterance is its own
/// source with a stream keyed by (seed, subset_tag, utt_id).
Corpus AnonymizeCorpus(const Corpus &corpus, const Corpus &pool,
                       const Plda &plda, const AnonConfig &cfg, int jobs = 1);

}  // namespace vprivacy

#endif  // VPRIVACY_ANONYMIZER_H_
