// vprivacy/metrics.cc

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

#include "vprivacy/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

namespace vprivacy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void RequireBothClasses(std::span<const double> targets,
                        std::span<const double> nontargets) {
  if (targets.empty()) throw Error("no target scores");
  if (nontargets.empty()) throw Error("no nontarget scores");
  for (double s : targets)
    if (!std::isfinite(s)) throw Error("non-finite target score");
  for (double s : nontargets)
    if (!std::isfinite(s)) throw Error("non-finite nontarget score");
}

std::vector<double> Sorted(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Thresholds of the operating points: -inf, distinct scores, +inf.
std::vector<double> OperatingThresholds(const std::vector<double> &tar,
                                        const std::vector<double> &non) {
  std::vector<double> all;
  all.reserve(tar.size() + non.size() + 2);
  all.push_back(-kInf);
  std::merge(tar.begin(), tar.end(), non.begin(), non.end(),
             std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());
  all.push_back(kInf);
  return all;
}

struct Rates {
  double p_miss;
  double p_fa;
};

Rates RatesAt(double threshold, const std::vector<double> &tar,
              const std::vector<double> &non) {
  auto below_tar = std::lower_bound(tar.begin(), tar.end(), threshold) - tar.begin();
  auto below_non = std::lower_bound(non.begin(), non.end(), threshold) - non.begin();
  return {static_cast<double>(below_tar) / static_cast<double>(tar.size()),
          static_cast<double>(non.size() - static_cast<size_t>(below_non)) /
              static_cast<double>(non.size())};
}

// log2(1 + e^x) without overflow.  Dividing by log1p(1) rather than a
// literal ln 2 makes a zero score cost exactly one bit.
double SoftplusBits(double x) {
  static const double kLn2 = std::log1p(1.0);
  double nat = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return nat / kLn2;
}

struct PavBlock {
  double numer;
  double weight;
  size_t count;  // number of input items pooled
};

// Pools adjacent violators; the value of a block is numer / weight.
std::vector<PavBlock> PavBlocks(std::span<const double> numer,
                                std::span<const double> weight) {
  std::vector<PavBlock> stack;
  for (size_t i = 0; i < numer.size(); i++) {
    stack.push_back({numer[i], weight[i], 1});
    while (stack.size() >= 2) {
      const PavBlock &b = stack[stack.size() - 1];
      const PavBlock &a = stack[stack.size() - 2];
      // a.numer / a.weight > b.numer / b.weight, weights positive.
      if (a.numer * b.weight <= b.numer * a.weight) break;
      PavBlock merged{a.numer + b.numer, a.weight + b.weight, a.count + b.count};
      stack.pop_back();
      stack.back() = merged;
    }
  }
  return stack;
}

}  // namespace

EerResult ComputeEer(std::span<const double> targets,
                     std::span<const double> nontargets) {
  RequireBothClasses(targets, nontargets);
  const std::vector<double> tar = Sorted(targets), non = Sorted(nontargets);
  const std::vector<double> thresholds = OperatingThresholds(tar, non);

  Rates prev = RatesAt(thresholds[0], tar, non);
  for (size_t j = 1; j < thresholds.size(); j++) {
    Rates cur = RatesAt(thresholds[j], tar, non);
    double d_cur = cur.p_fa - cur.p_miss;
    if (d_cur > 0) {
      prev = cur;
      continue;
    }
    if (d_cur == 0) return {cur.p_miss, thresholds[j]};
    double d_prev = prev.p_fa - prev.p_miss;
    double frac = d_prev / (d_prev - d_cur);
    double eer = prev.p_miss + frac * (cur.p_miss - prev.p_miss);
    double t0 = thresholds[j - 1], t1 = thresholds[j];
    double threshold;
    if (std::isinf(t0)) {
      threshold = t1;
    } else if (std::isinf(t1)) {
      threshold = t0;
    } else {
      threshold = t0 + frac * (t1 - t0);
    }
    return {eer, threshold};
  }
  // Unreachable: at +inf P_fa - P_miss = -1.
  throw Error("EER sweep did not cross");
}

double ComputeCllr(std::span<const double> targets,
                   std::span<const double> nontargets) {
  RequireBothClasses(targets, nontargets);
  double tar_sum = 0.0, non_sum = 0.0;
  for (double s : targets) tar_sum += SoftplusBits(-s);
  for (double s : nontargets) non_sum += SoftplusBits(s);
  return 0.5 * (tar_sum / static_cast<double>(targets.size()) +
                non_sum / static_cast<double>(nontargets.size()));
}

std::vector<double> PoolAdjacentViolators(std::span<const double> values,
                                          std::span<const double> weights) {
  if (values.size() != weights.size())
    throw Error("PAV: values and weights differ in length");
  std::vector<double> numer(values.size());
  for (size_t i = 0; i < values.size(); i++) {
    if (!(weights[i] > 0)) throw Error("PAV: weights must be positive");
    numer[i] = values[i] * weights[i];
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const PavBlock &b : PavBlocks(numer, weights))
    out.insert(out.end(), b.count, b.numer / b.weight);
  return out;
}

double ComputeMinCllr(std::span<const double> targets,
                      std::span<const double> nontargets) {
  RequireBothClasses(targets, nontargets);
  // (score, is_target) sorted by score, then collapsed to tie blocks.
  std::vector<std::pair<double, int>> labeled;
  labeled.reserve(targets.size() + nontargets.size());
  for (double s : targets) labeled.emplace_back(s, 1);
  for (double s : nontargets) labeled.emplace_back(s, 0);
  std::sort(labeled.begin(), labeled.end());

  std::vector<double> tie_targets, tie_totals;
  for (size_t i = 0; i < labeled.size();) {
    size_t j = i;
    double n_tar = 0;
    while (j < labeled.size() && labeled[j].first == labeled[i].first) {
      n_tar += labeled[j].second;
      j++;
    }
    tie_targets.push_back(n_tar);
    tie_totals.push_back(static_cast<double>(j - i));
    i = j;
  }

  const double n_tar = static_cast<double>(targets.size());
  const double n_non = static_cast<double>(nontargets.size());
  // Prior odds of the empirical target proportion.
  const double prior_odds = n_tar / n_non;

  double tar_sum = 0.0, non_sum = 0.0;
  for (const PavBlock &b : PavBlocks(tie_targets, tie_totals)) {
    const double block_tar = b.numer;
    const double block_non = b.weight - b.numer;
    // Calibrated LLR = log(block_tar / block_non) - log(prior_odds), so
    // e^{-llr} = (block_non / block_tar) * prior_odds.
    if (block_tar > 0 && block_non > 0) {
      double odds = (block_tar / block_non) / prior_odds;  // e^{llr}
      tar_sum += block_tar * std::log1p(1.0 / odds);
      non_sum += block_non * std::log1p(odds);
    }
    // Pure blocks have posterior 0 or 1 and contribute nothing.
  }
  static const double kLn2 = std::log1p(1.0);
  return 0.5 * (tar_sum / n_tar + non_sum / n_non) / kLn2;
}

MetricsReport ComputeMetrics(std::span<const double> targets,
                             std::span<const double> nontargets) {
  MetricsReport r;
  EerResult eer = ComputeEer(targets, nontargets);
  r.eer = eer.eer;
  r.threshold_at_eer = eer.threshold;
  r.cllr = ComputeCllr(targets, nontargets);
  r.min_cllr = ComputeMinCllr(targets, nontargets);
  r.n_target = targets.size();
  r.n_nontarget = nontargets.size();
  return r;
}

MetricsReport ComputeMetrics(const ScoreSet &scores) {
  std::vector<double> tar = scores.TargetScores();
  std::vector<double> non = scores.NontargetScores();
  return ComputeMetrics(tar, non);
}

DetCurve ComputeDet(std::span<const double> targets,
                    std::span<const double> nontargets) {
  RequireBothClasses(targets, nontargets);
  const std::vector<double> tar = Sorted(targets), non = Sorted(nontargets);
  const boost::math::normal_distribution<double> normal;
  auto probit = [&](double rate, size_t n) {
    double lo = 1.0 / (2.0 * static_cast<double>(n));
    return boost::math::quantile(normal, std::clamp(rate, lo, 1.0 - lo));
  };
  DetCurve curve;
  for (double t : OperatingThresholds(tar, non)) {
    Rates r = RatesAt(t, tar, non);
    curve.points.push_back({t, r.p_fa, r.p_miss, probit(r.p_fa, non.size()),
                            probit(r.p_miss, tar.size())});
  }
  return curve;
}

void WriteDet(const DetCurve &curve, std::ostream &os) {
  os << "# threshold p_fa p_miss probit_fa probit_miss\n";
  for (const DetPoint &p : curve.points) {
    if (std::isinf(p.threshold)) {
      os << (p.threshold < 0 ? "-inf" : "inf");
    } else {
      os << FormatFixed(p.threshold, 6);
    }
    os << ' ' << FormatFixed(p.p_fa, 6) << ' ' << FormatFixed(p.p_miss, 6)
       << ' ' << FormatFixed(p.probit_fa, 6) << ' '
       << FormatFixed(p.probit_miss, 6) << '\n';
  }
}

double WerResult::wer() const {
  if (ref_words == 0) throw Error("WER undefined for an empty reference");
  return 100.0 * static_cast<double>(errors()) / static_cast<double>(ref_words);
}

WerResult &WerResult::operator+=(const WerResult &other) {
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  ref_words += other.ref_words;
  return *this;
}

WerResult AlignWords(std::span<const std::string> ref,
                     std::span<const std::string> hyp) {
  const size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: edits turning ref[0, i) into hyp[0, j).
  std::vector<std::vector<size_t>> cost(n + 1, std::vector<size_t>(m + 1));
  for (size_t i = 0; i <= n; i++) cost[i][0] = i;
  for (size_t j = 0; j <= m; j++) cost[0][j] = j;
  for (size_t i = 1; i <= n; i++) {
    for (size_t j = 1; j <= m; j++) {
      size_t sub = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({sub, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }
  WerResult r;
  r.ref_words = n;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      size_t mismatch = ref[i - 1] == hyp[j - 1] ? 0 : 1;
      if (cost[i][j] == cost[i - 1][j - 1] + mismatch) {
        r.substitutions += mismatch;
        i--;
        j--;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      r.deletions++;
      i--;
    } else {
      r.insertions++;
      j--;
    }
  }
  return r;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (std::string_view tok : SplitWhitespace(text)) out.emplace_back(tok);
  return out;
}

WerResult ComputeWer(std::string_view ref, std::string_view hyp) {
  std::vector<std::string> r = Tokenize(ref), h = Tokenize(hyp);
  if (r.empty()) throw Error("WER reference is empty");
  return AlignWords(r, h);
}

}  // namespace vprivacy
