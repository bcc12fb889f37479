// vprivacy/synthgen.h

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

#ifndef VPRIVACY_SYNTHGEN_H_
#define VPRIVACY_SYNTHGEN_H_

#include <optional>

#include "vprivacy/embedding_io.h"
#include "vprivacy/plda.h"

namespace vprivacy {

/// Synthetic corpus drawn from the PLDA generative model with zero mean.
struct GenSpec {
  size_t n_speakers = 200;
  size_t utts_per_speaker = 10;
  Eigen::MatrixXd between;  // PSD, D x D
  Eigen::MatrixXd within;   // PSD, D x D
  double female_fraction = 0.5;
  uint64_t seed = 0;

  int dim() const { return static_cast<int>(between.rows()); }

  /// 200 x 10, D = 32, between = Q diag(eigs) Q^T with eigenvalues evenly
  /// spaced over [0.5, 2] and Q a seeded random rotation, within = I.
  static GenSpec Default(uint64_t seed = 0, int dim = 32);
};

/// Random symmetric matrix with the given eigenvalues and a Haar-random
/// eigenbasis.
Eigen::MatrixXd RandomCovariance(const Eigen::VectorXd &eigenvalues,
                                 RandomStream &stream);

struct GeneratedCorpus {
  Corpus corpus;
  PldaModel truth;
};

/// Speakers "spk0000".. get offsets y ~ N(0, between); utterances
/// "spk0000-u00".. are y + e, e ~ N(0, within).  The first
/// round(female_fraction * n_speakers) speakers are female.
GeneratedCorpus Generate(const GenSpec &spec);

struct SplitFractions {
  double train = 0.4;
  double pool = 0.3;
  double enroll = 0.1;
  double trial = 0.2;
};

struct CorpusSplit {
  std::optional<Corpus> train, pool, enroll, trial;
};

/// Speakers are shuffled and cut into train / pool / evaluation groups by
/// cumulative fraction.  Each evaluation speaker's utterances are split
/// between enroll and trial in ratio enroll:trial, at least one each when
/// both fractions are non-zero.  Empty subsets are left unset.
CorpusSplit Split(const Corpus &corpus, const SplitFractions &fractions,
                  uint64_t seed);

}  // namespace vprivacy

#endif  // VPRIVACY_SYNTHGEN_H_
