// vprivacy/synthgen.cc

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

#include "vprivacy/synthgen.h"

#include <cmath>
#include <cstdio>
#include <set>

namespace vprivacy {

namespace {

// Square-root factor F with F F^T = cov; throws if cov is not PSD.
Eigen::MatrixXd PsdFactor(const Eigen::MatrixXd &cov, const char *what) {
  if (cov.rows() != cov.cols()) throw DimensionError(std::string(what) + " is not square");
  if (!cov.allFinite()) throw Error(std::string(what) + " has non-finite entries");
  double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw Error(std::string(what) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
    throw Error(std::string(what) + " is not positive semi-definite");
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

Eigen::VectorXd SampleNormal(const Eigen::MatrixXd &factor, RandomStream &stream) {
  Eigen::VectorXd z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); i++) z(i) = stream.Normal();
  return factor * z;
}

std::string Numbered(const char *prefix, size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
  return buf;
}

int Width(size_t n) {
  int w = 1;
  for (size_t v = n > 0 ? n - 1 : 0; v >= 10; v /= 10) w++;
  return std::max(w, 2);
}

}  // namespace

Eigen::MatrixXd RandomCovariance(const Eigen::VectorXd &eigenvalues,
                                 RandomStream &stream) {
  const Eigen::Index d = eigenvalues.size();
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; i++)
    for (Eigen::Index j = 0; j < d; j++) g(i, j) = stream.Normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix so the distribution of q is uniform over rotations.
  for (Eigen::Index j = 0; j < d; j++)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  Eigen::MatrixXd cov = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (cov + cov.transpose());
}

GenSpec GenSpec::Default(uint64_t seed, int dim) {
  GenSpec spec;
  spec.seed = seed;
  Eigen::VectorXd eigs(dim);
  for (int i = 0; i < dim; i++)
    eigs(i) = dim == 1 ? 1.0 : 0.5 + 1.5 * i / static_cast<double>(dim - 1);
  RandomStream stream = RandomStream::Keyed(seed, "synthgen", "rotation");
  spec.between = RandomCovariance(eigs, stream);
  spec.within = Eigen::MatrixXd::Identity(dim, dim);
  return spec;
}

GeneratedCorpus Generate(const GenSpec &spec) {
  if (spec.n_speakers == 0 || spec.utts_per_speaker == 0)
    throw Error("n_speakers and utts_per_speaker must be positive");
  if (spec.dim() == 0) throw DimensionError("dimension must be positive");
  if (spec.within.rows() != spec.between.rows())
    throw DimensionError("between and within covariances differ in size");
  if (!(spec.female_fraction >= 0.0 && spec.female_fraction <= 1.0))
    throw Error("female_fraction must be in [0, 1]");
  const Eigen::MatrixXd between_factor = PsdFactor(spec.between, "between covariance");
  const Eigen::MatrixXd within_factor = PsdFactor(spec.within, "within covariance");

  const size_t n_female = static_cast<size_t>(
      std::lround(spec.female_fraction * static_cast<double>(spec.n_speakers)));
  const int spk_width = Width(spec.n_speakers);
  const int utt_width = Width(spec.utts_per_speaker);

  std::vector<Embedding> records;
  records.reserve(spec.n_speakers * spec.utts_per_speaker);
  for (size_t s = 0; s < spec.n_speakers; s++) {
    std::string spk = Numbered("spk", s, spk_width);
    RandomStream stream = RandomStream::Keyed(spec.seed, "synthgen", spk);
    Eigen::VectorXd offset = SampleNormal(between_factor, stream);
    for (size_t u = 0; u < spec.utts_per_speaker; u++) {
      Embedding e;
      e.spk_id = spk;
      e.utt_id = spk + Numbered("-u", u, utt_width);
      e.gender = s < n_female ? Gender::kFemale : Gender::kMale;
      e.vector = offset + SampleNormal(within_factor, stream);
      records.push_back(std::move(e));
    }
  }
  PldaModel truth;
  truth.mean = Eigen::VectorXd::Zero(spec.dim());
  truth.between = spec.between;
  truth.within = spec.within;
  return {Corpus("synth", Subset::kTraining, std::move(records)), std::move(truth)};
}

CorpusSplit Split(const Corpus &corpus, const SplitFractions &f, uint64_t seed) {
  for (double v : {f.train, f.pool, f.enroll, f.trial})
    if (!(v >= 0.0)) throw Error("split fractions must be non-negative");
  if (std::abs(f.train + f.pool + f.enroll + f.trial - 1.0) > 1e-9)
    throw Error("split fractions must sum to 1");

  std::vector<std::string> speakers;
  for (const auto &[spk, idx] : corpus.speakers()) speakers.push_back(spk);
  RandomStream stream = RandomStream::Keyed(seed, "split", "speakers");
  stream.Shuffle(&speakers);

  const double n = static_cast<double>(speakers.size());
  const size_t cut_train = static_cast<size_t>(std::lround(f.train * n));
  const size_t cut_pool = std::max(
      cut_train, static_cast<size_t>(std::lround((f.train + f.pool) * n)));
  const bool has_eval = f.enroll + f.trial > 0.0;

  std::map<std::string, Subset> speaker_subset;  // train or pool only
  for (size_t i = 0; i < speakers.size(); i++) {
    if (i < cut_train) {
      speaker_subset[speakers[i]] = Subset::kTraining;
    } else if (i < cut_pool || !has_eval) {
      speaker_subset[speakers[i]] = Subset::kPool;
    }
  }

  std::set<std::string> enroll_utts;
  for (const auto &[spk, idx] : corpus.speakers()) {
    if (speaker_subset.count(spk)) continue;
    std::vector<size_t> order = idx;
    RandomStream utt_stream = RandomStream::Keyed(seed, "split", spk);
    utt_stream.Shuffle(&order);
    size_t n_enroll;
    if (f.enroll > 0 && f.trial > 0) {
      if (order.size() < 2)
        throw Error("speaker '" + spk +
                    "' needs at least 2 utterances for enroll/trial split");
      double share = f.enroll / (f.enroll + f.trial);
      n_enroll = static_cast<size_t>(
          std::lround(share * static_cast<double>(order.size())));
      n_enroll = std::clamp<size_t>(n_enroll, 1, order.size() - 1);
    } else {
      n_enroll = f.enroll > 0 ? order.size() : 0;
    }
    for (size_t k = 0; k < n_enroll; k++)
      enroll_utts.insert(corpus.records()[order[k]].utt_id);
  }

  std::vector<Embedding> train, pool, enroll, trial;
  for (const Embedding &e : corpus.records()) {
    auto it = speaker_subset.find(e.spk_id);
    if (it != speaker_subset.end()) {
      (it->second == Subset::kTraining ? train : pool).push_back(e);
    } else if (enroll_utts.count(e.utt_id)) {
      enroll.push_back(e);
    } else {
      trial.push_back(e);
    }
  }
  auto make = [](std::vector<Embedding> v, const char *name,
                 Subset subset) -> std::optional<Corpus> {
    if (v.empty()) return std::nullopt;
    return Corpus(name, subset, std::move(v));
  };
  CorpusSplit out;
  out.train = make(std::move(train), "train", Subset::kTraining);
  out.pool = make(std::move(pool), "pool", Subset::kPool);
  out.enroll = make(std::move(enroll), "enroll", Subset::kEnrollment);
  out.trial = make(std::move(trial), "trial", Subset::kTrial);
  return out;
}

}  // namespace vprivacy
