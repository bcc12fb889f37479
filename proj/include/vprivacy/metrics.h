// vprivacy/metrics.h

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

#ifndef VPRIVACY_METRICS_H_
#define VPRIVACY_METRICS_H_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vprivacy/embedding_io.h"

namespace vprivacy {

// Detection error conventions used throughout:
//   P_miss(t) = fraction of target scores    <  t
//   P_fa(t)   = fraction of nontarget scores >= t

struct EerResult {
  double eer = 0.0;        // fraction in [0, 1]
  double threshold = 0.0;
};

/// EER by linear interpolation between the two adjacent operating points
/// (observed scores plus -inf/+inf) where P_fa - P_miss changes sign.
EerResult ComputeEer(std::span<const double> targets,
                     std::span<const double> nontargets);

/// Cllr in bits:
///   0.5 * [ mean_tar log2(1 + e^-s) + mean_non log2(1 + e^s) ].
double ComputeCllr(std::span<const double> targets,
                   std::span<const double> nontargets);

/// Weighted pool-adjacent-violators: the non-decreasing sequence minimizing
/// sum w_i (y_i - f_i)^2.  Weights must be positive.
std::vector<double> PoolAdjacentViolators(std::span<const double> values,
                                          std::span<const double> weights);

/// Cllr after optimal monotone recalibration.  Tied scores are merged into
/// one block, PAV turns the sorted labels into posteriors, and the
/// calibrated LLR is logit(posterior) - logit(n_tar / (n_tar + n_non)).
/// Posteriors of exactly 0 or 1 contribute their limit value 0.
double ComputeMinCllr(std::span<const double> targets,
                      std::span<const double> nontargets);

struct MetricsReport {
  double eer = 0.0;
  double cllr = 0.0;
  double min_cllr = 0.0;
  size_t n_target = 0;
  size_t n_nontarget = 0;
  double threshold_at_eer = 0.0;
};

MetricsReport ComputeMetrics(std::span<const double> targets,
                             std::span<const double> nontargets);
/// Every entry must carry a label.
MetricsReport ComputeMetrics(const ScoreSet &scores);

struct DetPoint {
  double threshold = 0.0;
  double p_fa = 0.0;
  double p_miss = 0.0;
  double probit_fa = 0.0;
  double probit_miss = 0.0;
};

/// Operating points at -inf, every distinct observed score (ascending) and
/// +inf.  Probit columns clamp rates to [1/(2n), 1 - 1/(2n)] first, n being
/// the class size.
struct DetCurve {
  std::vector<DetPoint> points;
};

DetCurve ComputeDet(std::span<const double> targets,
                    std::span<const double> nontargets);
/// "# threshold p_fa p_miss probit_fa probit_miss" then one line per point.
void WriteDet(const DetCurve &curve, std::ostream &os);

struct WerResult {
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t ref_words = 0;

  size_t errors() const { return substitutions + deletions + insertions; }
  /// Percentage; may exceed 100 when insertions dominate.
  double wer() const;
  WerResult &operator+=(const WerResult &other);
};

/// Minimum edit alignment with unit costs.  On ties the backtrace prefers
/// substitution (or match), then deletion, then insertion.  An empty
/// reference is allowed here; it yields insertions only.
WerResult AlignWords(std::span<const std::string> ref,
                     std::span<const std::string> hyp);

/// Whitespace tokenization, case-sensitive.  Throws on an empty reference.
WerResult ComputeWer(std::string_view ref, std::string_view hyp);

std::vector<std::string> Tokenize(std::string_view text);

}  // namespace vprivacy

#endif  // VPRIVACY_METRICS_H_
