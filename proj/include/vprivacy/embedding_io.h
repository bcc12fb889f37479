// vprivacy/embedding_io.h

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

#ifndef VPRIVACY_EMBEDDING_IO_H_
#define VPRIVACY_EMBEDDING_IO_H_

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vprivacy/common.h"

namespace vprivacy {

enum class Gender : uint8_t { kFemale = 0, kMale = 1 };

char GenderChar(Gender g);  // 'F' or 'M'
std::optional<Gender> GenderFromChar(char c);

/// One utterance's speaker embedding (x-vector).
struct Embedding {
  std::string utt_id;
  std::string spk_id;
  Gender gender = Gender::kFemale;
  Eigen::VectorXd vector;
};

enum class Subset { kEnrollment, kTrial, kPool, kTraining };

/// An immutable, validated collection of embeddings.  Construction enforces:
/// non-empty, one dimension for all records, finite coordinates and unique
/// utt_ids.  Record order is preserved.
class Corpus {
 public:
  Corpus(std::string name, Subset subset, std::vector<Embedding> records);

  const std::string &name() const { return name_; }
  Subset subset() const { return subset_; }
  const std::vector<Embedding> &records() const { return records_; }
  size_t size() const { return records_.size(); }
  int dim() const { return static_cast<int>(records_.front().vector.size()); }

  /// nullptr if absent.
  const Embedding *FindUtterance(const std::string &utt_id) const;
  /// Record indices grouped by speaker, speakers in lexicographic order and
  /// indices in corpus order.
  const std::map<std::string, std::vector<size_t>> &speakers() const {
    return speakers_;
  }
  /// Gender of a speaker; throws if the speaker is unknown.
  Gender SpeakerGender(const std::string &spk_id) const;

 private:
  std::string name_;
  Subset subset_;
  std::vector<Embedding> records_;
  std::map<std::string, size_t> utt_index_;
  std::map<std::string, std::vector<size_t>> speakers_;
};

enum class EmbeddingFormat { kText, kBinary };

/// Text: "<utt> <spk> <F|M> <v1> ... <vD>" per line, '#' comments skipped.
/// Binary: "XVC1", u32 D, u32 count, then per record u16-prefixed utt and spk
/// ids, u8 gender, D little-endian doubles.
Corpus ReadEmbeddings(std::istream &is, EmbeddingFormat format,
                      const std::string &name,
                      Subset subset = Subset::kTraining);
void WriteEmbeddings(const Corpus &corpus, std::ostream &os,
                     EmbeddingFormat format);

/// The corpus name is taken from the file stem.
Corpus LoadEmbeddings(const std::string &path, EmbeddingFormat format,
                      Subset subset = Subset::kTraining);
void SaveEmbeddings(const Corpus &corpus, const std::string &path,
                    EmbeddingFormat format);

/// "text" / "binary".
EmbeddingFormat ParseEmbeddingFormat(const std::string &s);

// ---------------------------------------------------------------------------
// Trials and scores

enum class TrialLabel { kTarget, kNontarget };

const char *TrialLabelName(TrialLabel label);

struct Trial {
  std::string enroll_spk;
  std::string test_utt;
  TrialLabel label = TrialLabel::kTarget;
};

/// Verification trials keyed by (enroll_spk, test_utt); duplicate keys are
/// rejected at construction.
class TrialList {
 public:
  TrialList() = default;
  explicit TrialList(std::vector<Trial> entries);

  const std::vector<Trial> &entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  size_t NumTargets() const;
  size_t NumNontargets() const { return size() - NumTargets(); }
  /// nullptr if the pair is not a trial.
  const Trial *Find(const std::string &enroll_spk,
                    const std::string &test_utt) const;

 private:
  std::vector<Trial> entries_;
  std::map<std::pair<std::string, std::string>, size_t> index_;
};

struct TrialPolicy {
  bool same_gender_only = true;
  /// Cap on the number of nontarget trials; unset means exhaustive.
  std::optional<size_t> max_nontargets;
  uint64_t seed = 0;
};

/// Targets: every trial utterance of each enrolled speaker, except utterances
/// that also appear in that speaker's enrollment set.  Nontargets: trial
/// utterances of other speakers (same gender only, if the policy says so).
/// Entries are sorted by (enroll_spk, test_utt).
TrialList MakeTrials(const Corpus &enroll, const Corpus &trial,
                     const TrialPolicy &policy);

TrialList ReadTrials(std::istream &is);
void WriteTrials(const TrialList &trials, std::ostream &os);
TrialList LoadTrials(const std::string &path);
void SaveTrials(const TrialList &trials, const std::string &path);

struct ScoredTrial {
  std::string enroll_spk;
  std::string test_utt;
  double score = 0.0;
  std::optional<TrialLabel> label;
};

class ScoreSet {
 public:
  ScoreSet() = default;
  explicit ScoreSet(std::vector<ScoredTrial> entries);

  const std::vector<ScoredTrial> &entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  /// Scores split by label; throws if any entry is unlabeled.
  std::vector<double> TargetScores() const;
  std::vector<double> NontargetScores() const;

 private:
  std::vector<ScoredTrial> entries_;
};

/// Copies labels from `trials` onto `scores`; every score key must be a trial.
ScoreSet AttachLabels(const ScoreSet &scores, const TrialList &trials);

/// "<enroll_spk> <test_utt> <score>" with six decimals.
void WriteScores(const ScoreSet &scores, std::ostream &os);
ScoreSet ReadScores(std::istream &is);
void SaveScores(const ScoreSet &scores, const std::string &path);
ScoreSet LoadScores(const std::string &path);

}  // namespace vprivacy

#endif  // VPRIVACY_EMBEDDING_IO_H_
