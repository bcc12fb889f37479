// vprivacy/plda.h

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

#ifndef VPRIVACY_PLDA_H_
#define VPRIVACY_PLDA_H_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "vprivacy/embedding_io.h"

namespace vprivacy {

/// Two-covariance PLDA:  x = mean + y + e,  y ~ N(0, between),
/// e ~ N(0, within).
struct PldaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd between;
  Eigen::MatrixXd within;

  int dim() const { return static_cast<int>(mean.size()); }
  /// Throws unless between is symmetric PSD, within symmetric PD and all
  /// entries finite.
  void Validate() const;
};

/// Model file: "PLD1", u32 D, then mean, between (row-major), within
/// (row-major) as little-endian doubles.
void WritePlda(const PldaModel &model, std::ostream &os);
PldaModel ReadPlda(std::istream &is);
void SavePlda(const PldaModel &model, const std::string &path);
PldaModel LoadPlda(const std::string &path);

struct PreprocessConfig {
  bool center = false;
  bool length_normalize = false;
};

/// Centering subtracts the corpus's own mean; length normalization scales
/// each vector to norm sqrt(D).  Centering happens first.
Corpus Preprocess(const Corpus &corpus, const PreprocessConfig &config);

/// A model prepared for scoring.  Internally both covariances are
/// simultaneously diagonalized (within -> I, between -> diag(psi)) so each
/// LLR is a sum of independent per-dimension terms.
class Plda {
 public:
  explicit Plda(PldaModel model);

  const PldaModel &model() const { return model_; }
  int dim() const { return model_.dim(); }
  /// Between-speaker variances in the diagonalized space.
  const Eigen::VectorXd &psi() const { return psi_; }

  /// Projection into the diagonalized space.
  Eigen::VectorXd Transform(const Eigen::VectorXd &x) const;

  /// log N([a;b]; same speaker) - log N([a;b]; different speakers).
  /// Symmetric in its arguments bit-for-bit.
  double LogLikelihoodRatio(const Eigen::VectorXd &a,
                            const Eigen::VectorXd &b) const;
  /// Same, on vectors already passed through Transform().
  double TransformedLlr(const Eigen::VectorXd &u,
                        const Eigen::VectorXd &v) const;

  /// Dissimilarity used for pool ranking: the negated LLR.
  double Distance(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const {
    return -LogLikelihoodRatio(a, b);
  }

 private:
  void CheckDim(const Eigen::VectorXd &x) const;

  PldaModel model_;
  Eigen::MatrixXd transform_;
  Eigen::VectorXd psi_;
  // LLR = offset_ + sum_d [ -0.5 quad_(d) (u_d^2 + v_d^2) + cross_(d) u_d v_d ]
  Eigen::VectorXd quad_;
  Eigen::VectorXd cross_;
  double offset_ = 0.0;
};

/// Total log-likelihood of a labeled corpus under the model (speakers given
/// by spk_id), computed exactly per speaker from the speaker mean and
/// within-speaker scatter.
double PldaLogLikelihood(const PldaModel &model, const Corpus &corpus);

struct PldaTrainResult {
  PldaModel model;
  /// Log-likelihood of the initial model followed by one value per EM
  /// iteration.
  std::vector<double> log_likelihoods;
};

/// EM for the two-covariance model.  The mean is fixed at the data mean;
/// between starts at half the total covariance and within at half the total
/// covariance plus 1e-6 I.  After each M-step within gets a small ridge
/// (1e-9 * trace/D) to stay positive definite.
PldaTrainResult TrainPlda(const Corpus &corpus, int iterations);

/// Arithmetic mean of the vectors; throws on an empty set.
Eigen::VectorXd EnrollSpeaker(const std::vector<Eigen::VectorXd> &vectors);

struct ScoringOptions {
  /// Average the enrollment embeddings of a speaker before scoring.  When
  /// false every enrollment utterance is scored and the LLRs averaged.
  bool average_enrollment = true;
  int jobs = 1;
};

/// One score per trial, in trial-list order, labels copied from the list.
ScoreSet ScoreTrials(const Plda &plda, const Corpus &enroll,
                     const Corpus &test, const TrialList &trials,
                     const ScoringOptions &options = {});

}  // namespace vprivacy

#endif  // VPRIVACY_PLDA_H_
