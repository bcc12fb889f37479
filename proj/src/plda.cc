// vprivacy/plda.cc

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

#include "vprivacy/plda.h"

#include <cmath>
#include <cstring>
#include <map>
#include <numbers>

#include "binary_io.h"

namespace vprivacy {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
constexpr char kPldaMagic[4] = {'P', 'L', 'D', '1'};

bool IsSymmetric(const Eigen::MatrixXd &m) {
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale;
}

Eigen::MatrixXd Symmetrized(const Eigen::MatrixXd &m) {
  return 0.5 * (m + m.transpose());
}

// Per-speaker sufficient statistics.
struct SpeakerStats {
  int count = 0;
  Eigen::VectorXd offset;  // speaker mean minus model mean
};

struct CorpusStats {
  int dim = 0;
  int num_examples = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd within_scatter;  // sum over speakers of scatter around the speaker mean
  std::vector<SpeakerStats> speakers;
};

CorpusStats ComputeStats(const Corpus &corpus, const Eigen::VectorXd &mean) {
  CorpusStats stats;
  stats.dim = corpus.dim();
  stats.num_examples = static_cast<int>(corpus.size());
  stats.mean = mean;
  stats.within_scatter = Eigen::MatrixXd::Zero(stats.dim, stats.dim);
  for (const auto &[spk, idx] : corpus.speakers()) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(stats.dim);
    for (size_t i : idx) sum += corpus.records()[i].vector;
    Eigen::VectorXd spk_mean = sum / static_cast<double>(idx.size());
    for (size_t i : idx) {
      Eigen::VectorXd d = corpus.records()[i].vector - spk_mean;
      stats.within_scatter.noalias() += d * d.transpose();
    }
    stats.speakers.push_back({static_cast<int>(idx.size()), spk_mean - mean});
  }
  return stats;
}

Eigen::VectorXd CorpusMean(const Corpus &corpus) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(corpus.dim());
  for (const Embedding &e : corpus.records()) sum += e.vector;
  return sum / static_cast<double>(corpus.size());
}

double LogDetSpd(const Eigen::LLT<Eigen::MatrixXd> &llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::LLT<Eigen::MatrixXd> CheckedLlt(const Eigen::MatrixXd &m,
                                       const char *what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw Error(std::string(what) + " is not positive definite");
  return llt;
}

double LogLikelihoodFromStats(const PldaModel &model, const CorpusStats &s) {
  const int dim = s.dim;
  auto within_llt = CheckedLlt(model.within, "within-speaker covariance");
  double within_logdet = LogDetSpd(within_llt);
  double n_within = static_cast<double>(s.num_examples) -
                    static_cast<double>(s.speakers.size());
  // Within-speaker part: the (n-1) directions orthogonal to the speaker mean
  // are N(0, W) each.
  double ll = -0.5 * (n_within * (dim * kLog2Pi + within_logdet) +
                      within_llt.solve(s.within_scatter).trace());
  // Speaker-mean part: sqrt(n) (xbar - mu) ~ N(0, W + n B).
  std::map<int, Eigen::LLT<Eigen::MatrixXd>> cache;
  std::map<int, double> logdets;
  for (const SpeakerStats &spk : s.speakers) {
    auto it = cache.find(spk.count);
    if (it == cache.end()) {
      Eigen::MatrixXd c = model.within + spk.count * model.between;
      it = cache.emplace(spk.count, CheckedLlt(c, "W + nB")).first;
      logdets[spk.count] = LogDetSpd(it->second);
    }
    double quad = spk.count * spk.offset.dot(it->second.solve(spk.offset));
    ll += -0.5 * (dim * kLog2Pi + logdets[spk.count] + quad);
  }
  return ll;
}

// The ridge keeps W invertible; `floor` is non-zero only for degenerate data.
void RegularizeWithin(Eigen::MatrixXd *within, double floor) {
  const int dim = static_cast<int>(within->rows());
  double ridge = 1e-9 * within->trace() / dim;
  if (!(ridge > floor)) ridge = floor;
  within->diagonal().array() += ridge;
}

}  // namespace

void PldaModel::Validate() const {
  const Eigen::Index d = mean.size();
  if (d == 0) throw DimensionError("PLDA model has zero dimension");
  if (between.rows() != d || between.cols() != d || within.rows() != d ||
      within.cols() != d)
    throw DimensionError("PLDA covariance shapes do not match the mean");
  if (!mean.allFinite() || !between.allFinite() || !within.allFinite())
    throw Error("PLDA model has non-finite entries");
  if (!IsSymmetric(between) || !IsSymmetric(within))
    throw Error("PLDA covariances must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Symmetrized(within));
  if (llt.info() != Eigen::Success)
    throw Error("within-speaker covariance is not positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Symmetrized(between),
                                                     Eigen::EigenvaluesOnly);
  double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
    throw Error("between-speaker covariance is not positive semi-definite");
}

void WritePlda(const PldaModel &model, std::ostream &os) {
  os.write(kPldaMagic, 4);
  const int d = model.dim();
  internal::PutLe<uint32_t>(os, static_cast<uint32_t>(d));
  for (int i = 0; i < d; i++) internal::PutDouble(os, model.mean(i));
  for (int i = 0; i < d; i++)
    for (int j = 0; j < d; j++) internal::PutDouble(os, model.between(i, j));
  for (int i = 0; i < d; i++)
    for (int j = 0; j < d; j++) internal::PutDouble(os, model.within(i, j));
}

PldaModel ReadPlda(std::istream &is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kPldaMagic, 4) != 0)
    throw ParseError("bad magic, expected PLD1", 0);
  const uint32_t d = internal::GetLe<uint32_t>(is, "dimension");
  if (d == 0) throw DimensionError("PLDA model has zero dimension");
  PldaModel model;
  model.mean.resize(d);
  model.between.resize(d, d);
  model.within.resize(d, d);
  for (uint32_t i = 0; i < d; i++) model.mean(i) = internal::GetDouble(is, "mean");
  for (uint32_t i = 0; i < d; i++)
    for (uint32_t j = 0; j < d; j++)
      model.between(i, j) = internal::GetDouble(is, "between");
  for (uint32_t i = 0; i < d; i++)
    for (uint32_t j = 0; j < d; j++)
      model.within(i, j) = internal::GetDouble(is, "within");
  if (is.peek() != std::char_traits<char>::eof())
    throw ParseError("trailing bytes after PLDA model", 0);
  model.Validate();
  return model;
}

void SavePlda(const PldaModel &model, const std::string &path) {
  auto os = internal::OpenForWrite(path, true);
  WritePlda(model, os);
  internal::FinishWrite(os, path);
}

PldaModel LoadPlda(const std::string &path) {
  auto is = internal::OpenForRead(path, true);
  try {
    return ReadPlda(is);
  } catch (const Error &e) {
    throw Error(path + ": " + e.what());
  }
}

Corpus Preprocess(const Corpus &corpus, const PreprocessConfig &config) {
  std::vector<Embedding> records = corpus.records();
  if (config.center) {
    Eigen::VectorXd mean = CorpusMean(corpus);
    for (Embedding &e : records) e.vector -= mean;
  }
  if (config.length_normalize) {
    const double target = std::sqrt(static_cast<double>(corpus.dim()));
    for (Embedding &e : records) {
      double norm = e.vector.norm();
      if (norm == 0.0)
        throw Error("cannot length-normalize zero vector of utterance '" +
                    e.utt_id + "'");
      e.vector *= target / norm;
    }
  }
  return Corpus(corpus.name(), corpus.subset(), std::move(records));
}

Plda::Plda(PldaModel model) : model_(std::move(model)) {
  model_.Validate();
  const int d = model_.dim();
  // W = L L^T;  L^{-1} B L^{-T} = U diag(psi) U^T;  transform = U^T L^{-1}.
  Eigen::LLT<Eigen::MatrixXd> llt(Symmetrized(model_.within));
  Eigen::MatrixXd l_inv = llt.matrixL().solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd b_white =
      Symmetrized(l_inv * Symmetrized(model_.between) * l_inv.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b_white);
  psi_ = eig.eigenvalues().cwiseMax(0.0);
  transform_ = eig.eigenvectors().transpose() * l_inv;

  quad_.resize(d);
  cross_.resize(d);
  offset_ = 0.0;
  for (int i = 0; i < d; i++) {
    const double p = psi_(i);
    const double same_det = 2.0 * p + 1.0;  // det [[p+1, p], [p, p+1]]
    quad_(i) = (p + 1.0) / same_det - 1.0 / (p + 1.0);
    cross_(i) = p / same_det;
    offset_ += std::log(p + 1.0) - 0.5 * std::log(same_det);
  }
}

void Plda::CheckDim(const Eigen::VectorXd &x) const {
  if (x.size() != dim())
    throw DimensionError("vector dimension " + std::to_string(x.size()) +
                         " does not match PLDA dimension " +
                         std::to_string(dim()));
}

Eigen::VectorXd Plda::Transform(const Eigen::VectorXd &x) const {
  CheckDim(x);
  return transform_ * (x - model_.mean);
}

double Plda::TransformedLlr(const Eigen::VectorXd &u,
                            const Eigen::VectorXd &v) const {
  CheckDim(u);
  CheckDim(v);
  double sum = 0.0;
  const Eigen::Index d = u.size();
  for (Eigen::Index i = 0; i < d; i++) {
    const double a = u(i), b = v(i);
    sum += -0.5 * quad_(i) * (a * a + b * b) + cross_(i) * (a * b);
  }
  return offset_ + sum;
}

double Plda::LogLikelihoodRatio(const Eigen::VectorXd &a,
                                const Eigen::VectorXd &b) const {
  return TransformedLlr(Transform(a), Transform(b));
}

double PldaLogLikelihood(const PldaModel &model, const Corpus &corpus) {
  if (corpus.dim() != model.dim())
    throw DimensionError("corpus and PLDA model dimensions differ");
  return LogLikelihoodFromStats(model, ComputeStats(corpus, model.mean));
}

PldaTrainResult TrainPlda(const Corpus &corpus, int iterations) {
  if (iterations < 0) throw Error("iterations must be non-negative");
  if (corpus.speakers().size() < 2)
    throw Error("PLDA training needs at least 2 speakers");
  bool has_repeat = false;
  for (const auto &[spk, idx] : corpus.speakers())
    if (idx.size() >= 2) has_repeat = true;
  if (!has_repeat)
    throw Error("PLDA training needs a speaker with at least 2 utterances");

  const int d = corpus.dim();
  const Eigen::VectorXd mean = CorpusMean(corpus);
  const CorpusStats stats = ComputeStats(corpus, mean);

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const Embedding &e : corpus.records()) {
    Eigen::VectorXd c = e.vector - mean;
    total.noalias() += c * c.transpose();
  }
  total /= static_cast<double>(corpus.size());

  double floor = 0.0;
  if (total.trace() <= 1e-14 * (1.0 + mean.squaredNorm())) {
    floor = 1e-6;
    Warn("PLDA training data is degenerate (no variance); within-speaker "
         "covariance regularized by 1e-6 I");
  }

  PldaModel model;
  model.mean = mean;
  model.between = 0.5 * total;
  model.within = 0.5 * total;
  model.within.diagonal().array() += std::max(1e-6, floor);

  PldaTrainResult result;
  result.log_likelihoods.push_back(LogLikelihoodFromStats(model, stats));

  const double n_speakers = static_cast<double>(stats.speakers.size());
  const double n_examples = static_cast<double>(stats.num_examples);
  for (int iter = 0; iter < iterations; iter++) {
    // E-step.  For a speaker with n utterances and mean offset m,
    //   y | m ~ N(K m, B - K B),   K = B (B + W/n)^{-1}.
    Eigen::MatrixXd between_acc = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd within_acc = stats.within_scatter;
    std::map<int, std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> gain_cache;
    for (const SpeakerStats &spk : stats.speakers) {
      auto it = gain_cache.find(spk.count);
      if (it == gain_cache.end()) {
        Eigen::MatrixXd c = model.between + model.within / spk.count;
        Eigen::LLT<Eigen::MatrixXd> llt = CheckedLlt(Symmetrized(c), "B + W/n");
        Eigen::MatrixXd gain = llt.solve(model.between).transpose();
        Eigen::MatrixXd post_cov =
            Symmetrized(model.between - gain * model.between);
        it = gain_cache.emplace(spk.count, std::make_pair(gain, post_cov)).first;
      }
      const auto &[gain, post_cov] = it->second;
      Eigen::VectorXd y = gain * spk.offset;
      Eigen::VectorXd r = spk.offset - y;
      between_acc.noalias() += y * y.transpose();
      between_acc += post_cov;
      within_acc.noalias() += spk.count * (r * r.transpose());
      within_acc += spk.count * post_cov;
    }
    // M-step.
    model.between = Symmetrized(between_acc / n_speakers);
    model.within = Symmetrized(within_acc / n_examples);
    RegularizeWithin(&model.within, floor);
    result.log_likelihoods.push_back(LogLikelihoodFromStats(model, stats));
  }
  result.model = std::move(model);
  return result;
}

Eigen::VectorXd EnrollSpeaker(const std::vector<Eigen::VectorXd> &vectors) {
  if (vectors.empty()) throw Error("cannot enroll a speaker with no embeddings");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.front().size());
  for (const auto &v : vectors) {
    if (v.size() != sum.size())
      throw DimensionError("enrollment embeddings differ in dimension");
    sum += v;
  }
  return sum / static_cast<double>(vectors.size());
}

ScoreSet ScoreTrials(const Plda &plda, const Corpus &enroll,
                     const Corpus &test, const TrialList &trials,
                     const ScoringOptions &options) {
  // Transformed enrollment models, keyed by speaker.
  std::map<std::string, std::vector<Eigen::VectorXd>> enroll_models;
  std::map<std::string, Eigen::VectorXd> test_vectors;
  for (const Trial &t : trials.entries()) {
    if (!enroll_models.count(t.enroll_spk)) {
      auto it = enroll.speakers().find(t.enroll_spk);
      if (it == enroll.speakers().end())
        throw Error("enrollment speaker '" + t.enroll_spk +
                    "' not found in corpus " + enroll.name());
      std::vector<Eigen::VectorXd> vecs;
      for (size_t i : it->second) vecs.push_back(enroll.records()[i].vector);
      std::vector<Eigen::VectorXd> models;
      if (options.average_enrollment) {
        models.push_back(plda.Transform(EnrollSpeaker(vecs)));
      } else {
        for (const auto &v : vecs) models.push_back(plda.Transform(v));
      }
      enroll_models.emplace(t.enroll_spk, std::move(models));
    }
    if (!test_vectors.count(t.test_utt)) {
      const Embedding *e = test.FindUtterance(t.test_utt);
      if (e == nullptr)
        throw Error("test utterance '" + t.test_utt + "' not found in corpus " +
                    test.name());
      test_vectors.emplace(t.test_utt, plda.Transform(e->vector));
    }
  }

  std::vector<ScoredTrial> out(trials.size());
  ParallelFor(trials.size(), options.jobs, [&](size_t i) {
    const Trial &t = trials.entries()[i];
    const auto &models = enroll_models.at(t.enroll_spk);
    const Eigen::VectorXd &u = test_vectors.at(t.test_utt);
    double sum = 0.0;
    for (const auto &m : models) sum += plda.TransformedLlr(m, u);
    out[i] = {t.enroll_spk, t.test_utt, sum / static_cast<double>(models.size()),
              t.label};
  });
  return ScoreSet(std::move(out));
}

}  // namespace vprivacy
