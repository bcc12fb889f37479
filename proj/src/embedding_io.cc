// vprivacy/embedding_io.cc

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

#include "vprivacy/embedding_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "binary_io.h"

namespace vprivacy {

using internal::FinishWrite;
using internal::GetDouble;
using internal::GetLe;
using internal::OpenForRead;
using internal::OpenForWrite;
using internal::PutDouble;
using internal::PutLe;

char GenderChar(Gender g) { return g == Gender::kFemale ? 'F' : 'M'; }

std::optional<Gender> GenderFromChar(char c) {
  if (c == 'F') return Gender::kFemale;
  if (c == 'M') return Gender::kMale;
  return std::nullopt;
}

Corpus::Corpus(std::string name, Subset subset, std::vector<Embedding> records)
    : name_(std::move(name)), subset_(subset), records_(std::move(records)) {
  if (records_.empty()) throw Error("empty corpus");
  const Eigen::Index dim = records_.front().vector.size();
  if (dim == 0) throw DimensionError("embedding dimension must be positive");
  for (size_t i = 0; i < records_.size(); i++) {
    const Embedding &e = records_[i];
    if (e.vector.size() != dim)
      throw DimensionError("utterance '" + e.utt_id + "' has dimension " +
                           std::to_string(e.vector.size()) + ", expected " +
                           std::to_string(dim));
    if (!e.vector.allFinite())
      throw Error("utterance '" + e.utt_id + "' has non-finite coordinates");
    if (!utt_index_.emplace(e.utt_id, i).second)
      throw Error("duplicate utterance id '" + e.utt_id + "'");
    auto &group = speakers_[e.spk_id];
    if (!group.empty() && records_[group.front()].gender != e.gender)
      throw Error("speaker '" + e.spk_id + "' has inconsistent gender");
    group.push_back(i);
  }
}

const Embedding *Corpus::FindUtterance(const std::string &utt_id) const {
  auto it = utt_index_.find(utt_id);
  return it == utt_index_.end() ? nullptr : &records_[it->second];
}

Gender Corpus::SpeakerGender(const std::string &spk_id) const {
  auto it = speakers_.find(spk_id);
  if (it == speakers_.end())
    throw Error("unknown speaker '" + spk_id + "' in corpus " + name_);
  return records_[it->second.front()].gender;
}

namespace {

void PutString16(std::ostream &os, const std::string &s) {
  if (s.size() > 0xffff) throw Error("identifier too long: " + s);
  PutLe<uint16_t>(os, static_cast<uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string GetString16(std::istream &is) {
  uint16_t len = GetLe<uint16_t>(is, "identifier length");
  std::string s(len, '\0');
  if (len > 0 && !is.read(s.data(), len))
    throw ParseError("truncated binary file reading identifier", 0);
  return s;
}

constexpr char kEmbeddingMagic[4] = {'X', 'V', 'C', '1'};

Corpus ReadText(std::istream &is, const std::string &name, Subset subset) {
  std::vector<Embedding> records;
  std::string line;
  size_t line_no = 0;
  Eigen::Index dim = -1;
  while (std::getline(is, line)) {
    line_no++;
    if (!line.empty() && line[0] == '#') continue;
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 4)
      throw ParseError("expected '<utt> <spk> <F|M> <v1> ...'", line_no);
    Embedding e;
    e.utt_id = std::string(fields[0]);
    e.spk_id = std::string(fields[1]);
    auto gender = fields[2].size() == 1 ? GenderFromChar(fields[2][0])
                                        : std::nullopt;
    if (!gender)
      throw ParseError("gender must be F or M, got '" +
                           std::string(fields[2]) + "'", line_no);
    e.gender = *gender;
    Eigen::Index d = static_cast<Eigen::Index>(fields.size() - 3);
    if (dim >= 0 && d != dim)
      throw DimensionError("line " + std::to_string(line_no) +
                           ": dimension " + std::to_string(d) +
                           " differs from " + std::to_string(dim));
    dim = d;
    e.vector.resize(d);
    for (Eigen::Index k = 0; k < d; k++)
      e.vector(k) = ParseDouble(fields[static_cast<size_t>(k) + 3], line_no);
    records.push_back(std::move(e));
  }
  if (records.empty()) throw Error("empty corpus");
  return Corpus(name, subset, std::move(records));
}

Corpus ReadBinary(std::istream &is, const std::string &name, Subset subset) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kEmbeddingMagic, 4) != 0)
    throw ParseError("bad magic, expected XVC1", 0);
  uint32_t dim = GetLe<uint32_t>(is, "dimension");
  uint32_t count = GetLe<uint32_t>(is, "count");
  if (count == 0) throw Error("empty corpus");
  if (dim == 0) throw DimensionError("embedding dimension must be positive");
  std::vector<Embedding> records;
  records.reserve(count);
  for (uint32_t r = 0; r < count; r++) {
    Embedding e;
    e.utt_id = GetString16(is);
    e.spk_id = GetString16(is);
    uint8_t g = GetLe<uint8_t>(is, "gender");
    if (g > 1)
      throw ParseError("record " + std::to_string(r) + ": bad gender byte", 0);
    e.gender = static_cast<Gender>(g);
    e.vector.resize(dim);
    for (uint32_t k = 0; k < dim; k++) e.vector(k) = GetDouble(is, "vector");
    records.push_back(std::move(e));
  }
  if (is.peek() != std::char_traits<char>::eof())
    throw ParseError("trailing bytes after last record", 0);
  return Corpus(name, subset, std::move(records));
}

void CheckIdentifier(const std::string &id) {
  if (id.empty() || std::any_of(id.begin(), id.end(), [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r';
      }))
    throw Error("identifier '" + id + "' is empty or contains whitespace");
}

}  // namespace

Corpus ReadEmbeddings(std::istream &is, EmbeddingFormat format,
                      const std::string &name, Subset subset) {
  return format == EmbeddingFormat::kText ? ReadText(is, name, subset)
                                          : ReadBinary(is, name, subset);
}

void WriteEmbeddings(const Corpus &corpus, std::ostream &os,
                     EmbeddingFormat format) {
  if (format == EmbeddingFormat::kText) {
    for (const Embedding &e : corpus.records()) {
      CheckIdentifier(e.utt_id);
      CheckIdentifier(e.spk_id);
      os << e.utt_id << ' ' << e.spk_id << ' ' << GenderChar(e.gender);
      for (Eigen::Index k = 0; k < e.vector.size(); k++)
        os << ' ' << FormatDecimal(e.vector(k), 9);
      os << '\n';
    }
    return;
  }
  os.write(kEmbeddingMagic, 4);
  PutLe<uint32_t>(os, static_cast<uint32_t>(corpus.dim()));
  PutLe<uint32_t>(os, static_cast<uint32_t>(corpus.size()));
  for (const Embedding &e : corpus.records()) {
    PutString16(os, e.utt_id);
    PutString16(os, e.spk_id);
    PutLe<uint8_t>(os, static_cast<uint8_t>(e.gender));
    for (Eigen::Index k = 0; k < e.vector.size(); k++)
      PutDouble(os, e.vector(k));
  }
}

Corpus LoadEmbeddings(const std::string &path, EmbeddingFormat format,
                      Subset subset) {
  auto is = OpenForRead(path, format == EmbeddingFormat::kBinary);
  try {
    return ReadEmbeddings(is, format,
                          std::filesystem::path(path).stem().string(), subset);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what(), e.line());
  } catch (const DimensionError &e) {
    throw DimensionError(path + ": " + e.what());
  } catch (const Error &e) {
    throw Error(path + ": " + e.what());
  }
}

void SaveEmbeddings(const Corpus &corpus, const std::string &path,
                    EmbeddingFormat format) {
  auto os = OpenForWrite(path, format == EmbeddingFormat::kBinary);
  WriteEmbeddings(corpus, os, format);
  FinishWrite(os, path);
}

EmbeddingFormat ParseEmbeddingFormat(const std::string &s) {
  if (s == "text") return EmbeddingFormat::kText;
  if (s == "binary") return EmbeddingFormat::kBinary;
  throw Error("unknown embedding format '" + s + "' (text|binary)");
}

// ---------------------------------------------------------------------------

const char *TrialLabelName(TrialLabel label) {
  return label == TrialLabel::kTarget ? "target" : "nontarget";
}

TrialList::TrialList(std::vector<Trial> entries) : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); i++) {
    const Trial &t = entries_[i];
    if (!index_.emplace(std::make_pair(t.enroll_spk, t.test_utt), i).second)
      throw Error("duplicate trial '" + t.enroll_spk + " " + t.test_utt + "'");
  }
}

size_t TrialList::NumTargets() const {
  return static_cast<size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const Trial &t) {
        return t.label == TrialLabel::kTarget;
      }));
}

const Trial *TrialList::Find(const std::string &enroll_spk,
                             const std::string &test_utt) const {
  auto it = index_.find({enroll_spk, test_utt});
  return it == index_.end() ? nullptr : &entries_[it->second];
}

TrialList MakeTrials(const Corpus &enroll, const Corpus &trial,
                     const TrialPolicy &policy) {
  if (enroll.dim() != trial.dim())
    throw DimensionError("enrollment and trial corpora differ in dimension");
  std::vector<Trial> targets, nontargets;
  for (const auto &[spk, enroll_idx] : enroll.speakers()) {
    std::set<std::string> enroll_utts;
    for (size_t i : enroll_idx) enroll_utts.insert(enroll.records()[i].utt_id);
    Gender gender = enroll.SpeakerGender(spk);
    size_t n_target = 0;
    for (const Embedding &e : trial.records()) {
      if (e.spk_id == spk) {
        if (enroll_utts.count(e.utt_id)) continue;
        targets.push_back({spk, e.utt_id, TrialLabel::kTarget});
        n_target++;
      } else if (!policy.same_gender_only || e.gender == gender) {
        nontargets.push_back({spk, e.utt_id, TrialLabel::kNontarget});
      }
    }
    if (n_target == 0)
      Warn("enrollment speaker '" + spk + "' has no trial utterances");
  }
  if (policy.max_nontargets && nontargets.size() > *policy.max_nontargets) {
    RandomStream stream = RandomStream::Keyed(policy.seed, "trials", "");
    std::vector<size_t> keep = stream.SampleWithoutReplacement(
        nontargets.size(), *policy.max_nontargets);
    std::sort(keep.begin(), keep.end());
    std::vector<Trial> sampled;
    sampled.reserve(keep.size());
    for (size_t i : keep) sampled.push_back(nontargets[i]);
    nontargets = std::move(sampled);
  }
  std::vector<Trial> all = std::move(targets);
  all.insert(all.end(), nontargets.begin(), nontargets.end());
  std::sort(all.begin(), all.end(), [](const Trial &a, const Trial &b) {
    return std::tie(a.enroll_spk, a.test_utt) <
           std::tie(b.enroll_spk, b.test_utt);
  });
  return TrialList(std::move(all));
}

TrialList ReadTrials(std::istream &is) {
  std::vector<Trial> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    if (!line.empty() && line[0] == '#') continue;
    auto f = SplitWhitespace(line);
    if (f.empty()) continue;
    if (f.size() != 3)
      throw ParseError("expected '<enroll_spk> <test_utt> <target|nontarget>'",
                       line_no);
    Trial t{std::string(f[0]), std::string(f[1]), TrialLabel::kTarget};
    if (f[2] == "target") {
      t.label = TrialLabel::kTarget;
    } else if (f[2] == "nontarget") {
      t.label = TrialLabel::kNontarget;
    } else {
      throw ParseError("bad label '" + std::string(f[2]) + "'", line_no);
    }
    entries.push_back(std::move(t));
  }
  return TrialList(std::move(entries));
}

void WriteTrials(const TrialList &trials, std::ostream &os) {
  for (const Trial &t : trials.entries())
    os << t.enroll_spk << ' ' << t.test_utt << ' ' << TrialLabelName(t.label)
       << '\n';
}

TrialList LoadTrials(const std::string &path) {
  auto is = OpenForRead(path, false);
  try {
    return ReadTrials(is);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

void SaveTrials(const TrialList &trials, const std::string &path) {
  auto os = OpenForWrite(path, false);
  WriteTrials(trials, os);
  FinishWrite(os, path);
}

ScoreSet::ScoreSet(std::vector<ScoredTrial> entries)
    : entries_(std::move(entries)) {
  for (const ScoredTrial &s : entries_)
    if (!std::isfinite(s.score))
      throw Error("non-finite score for trial '" + s.enroll_spk + " " +
                  s.test_utt + "'");
}

namespace {

std::vector<double> ScoresWithLabel(const std::vector<ScoredTrial> &entries,
                                    TrialLabel wanted) {
  std::vector<double> out;
  for (const ScoredTrial &s : entries) {
    if (!s.label)
      throw Error("score for '" + s.enroll_spk + " " + s.test_utt +
                  "' has no label");
    if (*s.label == wanted) out.push_back(s.score);
  }
  return out;
}

}  // namespace

std::vector<double> ScoreSet::TargetScores() const {
  return ScoresWithLabel(entries_, TrialLabel::kTarget);
}

std::vector<double> ScoreSet::NontargetScores() const {
  return ScoresWithLabel(entries_, TrialLabel::kNontarget);
}

ScoreSet AttachLabels(const ScoreSet &scores, const TrialList &trials) {
  std::vector<ScoredTrial> out = scores.entries();
  for (ScoredTrial &s : out) {
    const Trial *t = trials.Find(s.enroll_spk, s.test_utt);
    if (t == nullptr)
      throw Error("score '" + s.enroll_spk + " " + s.test_utt +
                  "' is not in the trial list");
    s.label = t->label;
  }
  return ScoreSet(std::move(out));
}

void WriteScores(const ScoreSet &scores, std::ostream &os) {
  for (const ScoredTrial &s : scores.entries())
    os << s.enroll_spk << ' ' << s.test_utt << ' ' << FormatFixed(s.score, 6)
       << '\n';
}

ScoreSet ReadScores(std::istream &is) {
  std::vector<ScoredTrial> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    line_no++;
    if (!line.empty() && line[0] == '#') continue;
    auto f = SplitWhitespace(line);
    if (f.empty()) continue;
    if (f.size() != 3)
      throw ParseError("expected '<enroll_spk> <test_utt> <score>'", line_no);
    entries.push_back({std::string(f[0]), std::string(f[1]),
                       ParseDouble(f[2], line_no), std::nullopt});
  }
  return ScoreSet(std::move(entries));
}

void SaveScores(const ScoreSet &scores, const std::string &path) {
  auto os = OpenForWrite(path, false);
  WriteScores(scores, os);
  FinishWrite(os, path);
}

ScoreSet LoadScores(const std::string &path) {
  auto is = OpenForRead(path, false);
  try {
    return ReadScores(is);
  } catch (const ParseError &e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

}  // namespace vprivacy
