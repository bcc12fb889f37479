// vprivacy/tools/vpeval.cc

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

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vprivacy/anonymizer.h"
#include "vprivacy/embedding_io.h"
#include "vprivacy/formant_shift.h"
#include "vprivacy/harness.h"
#include "vprivacy/metrics.h"
#include "vprivacy/plda.h"
#include "vprivacy/synthgen.h"

namespace {

using namespace vprivacy;

const char *kUsage =
    "vpeval: speaker anonymization evaluation toolkit.\n"
    "Usage: vpeval <subcommand> [--config FILE] [--key value ...]\n"
    "Subcommands:\n"
    "  synth           generate a synthetic corpus and split it\n"
    "  make-trials     build a trial list from enrollment and trial data\n"
    "  train-plda      train a two-covariance PLDA model\n"
    "  anonymize-xvec  replace embeddings by pseudo-speaker embeddings\n"
    "  anonymize-wav   shift formants of a 16-bit mono WAV file\n"
    "  score           PLDA-score a trial list\n"
    "  eval            run the oo, oa and aa conditions and report\n"
    "  det             DET curve and metrics from scores and trials\n"
    "  wer             word error rate between reference and hypothesis\n"
    "Config files hold 'key = value' lines; command-line flags take\n"
    "precedence over file values.\n";

// Thrown for problems with the command line or config file.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::string &path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (size_t n = 1; std::getline(is, line); n++) {
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(n) +
                       ": expected 'key = value'");
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key.empty())
      throw UsageError(path + ":" + std::to_string(n) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

bool HasFlag(const std::vector<std::string> &args, const std::string &key) {
  const std::string flag = "--" + key;
  for (const auto &a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends --key=value for every config-file key not given on the command
// line.  Keys must name an option of the subcommand.
void InjectConfig(CLI::App *sub, std::vector<std::string> *args) {
  std::optional<std::string> path;
  for (size_t i = 0; i < args->size(); i++) {
    const std::string &a = (*args)[i];
    if (a == "--config" && i + 1 < args->size()) path = (*args)[i + 1];
    if (a.rfind("--config=", 0) == 0) path = a.substr(9);
  }
  if (!path) return;
  std::vector<std::string> extra;
  for (const auto &[key, value] : ReadConfigFile(*path)) {
    if (key == "config" || key == "help" ||
        sub->get_option_no_throw("--" + key) == nullptr)
      throw UsageError("unknown config key '" + key + "' for subcommand " +
                       sub->get_name());
    if (!HasFlag(*args, key)) extra.push_back("--" + key + "=" + value);
  }
  args->insert(args->end(), extra.begin(), extra.end());
}

std::string ProvenanceLine(const CLI::App *sub) {
  std::ostringstream os;
  os << "# vpeval " << sub->get_name();
  for (const CLI::Option *opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (name == "help") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto &r : opt->results())
        value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    os << ' ' << name << '=' << (value.empty() ? "-" : value);
  }
  return os.str();
}

EmbeddingFormat Format(const std::string &s) { return ParseEmbeddingFormat(s); }

std::string Extension(EmbeddingFormat f) {
  return f == EmbeddingFormat::kBinary ? ".bin" : ".txt";
}

void CheckJobs(int jobs) {
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
}

// Each subcommand keeps its option storage here.
struct Options {
  std::string format = "text";
  int jobs = 1;
  uint64_t seed = 0;

  // synth
  std::string out_dir;
  size_t n_speakers = 200, utts_per_speaker = 10;
  int dim = 32;
  double female_fraction = 0.5;
  double train_fraction = 0.4, pool_fraction = 0.3, enroll_fraction = 0.1,
         trial_fraction = 0.2;

  // shared paths
  std::string train, pool, enroll, trial, model, trials, out, input, scores;
  std::string records, anon_dir;

  // trials
  bool cross_gender = false;
  std::optional<size_t> max_nontargets;

  // plda
  int iterations = 20;
  bool average_enrollment = true;

  // anonymizer
  size_t n_farthest = 200, n_select = 100;
  std::string assignment = "per_speaker";
  std::string subset_tag = "trial";
  bool same_gender_pool = false;

  // eval
  std::string dataset = "eval";
  std::string conditions = "oo,oa,aa";
  bool same_tag = false;

  // anonymize-wav
  double alpha = 0.8;
  std::optional<int> lpc_order, frame_len, hop;

  // wer
  std::string ref, hyp;
};

AnonConfig MakeAnonConfig(const Options &o) {
  AnonConfig cfg;
  cfg.n_farthest = o.n_farthest;
  cfg.n_select = o.n_select;
  cfg.assignment = ParseAssignment(o.assignment);
  cfg.seed = o.seed;
  cfg.subset_tag = o.subset_tag;
  cfg.same_gender_pool = o.same_gender_pool;
  return cfg;
}

TrialPolicy MakeTrialPolicy(const Options &o) {
  TrialPolicy policy;
  policy.same_gender_only = !o.cross_gender;
  policy.max_nontargets = o.max_nontargets;
  policy.seed = o.seed;
  return policy;
}

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << text;
  os.flush();
  if (!os) throw Error("write to " + path + " failed");
}

int RunSynth(const Options &o) {
  GenSpec spec = GenSpec::Default(o.seed, o.dim);
  spec.n_speakers = o.n_speakers;
  spec.utts_per_speaker = o.utts_per_speaker;
  spec.female_fraction = o.female_fraction;
  GeneratedCorpus gen = Generate(spec);
  SplitFractions f{o.train_fraction, o.pool_fraction, o.enroll_fraction,
                   o.trial_fraction};
  CorpusSplit split = Split(gen.corpus, f, o.seed);
  const EmbeddingFormat fmt = Format(o.format);
  std::filesystem::create_directories(o.out_dir);
  const std::filesystem::path dir(o.out_dir);
  auto save = [&](const std::optional<Corpus> &c, const char *name) {
    if (!c) {
      std::cerr << "subset " << name << " is empty, not written\n";
      return;
    }
    SaveEmbeddings(*c, (dir / (name + Extension(fmt))).string(), fmt);
    std::cerr << name << ": " << c->size() << " utterances, "
              << c->speakers().size() << " speakers\n";
  };
  save(split.train, "train");
  save(split.pool, "pool");
  save(split.enroll, "enroll");
  save(split.trial, "trial");
  SavePlda(gen.truth, (dir / "truth.plda").string());
  return 0;
}

int RunMakeTrials(const Options &o) {
  const EmbeddingFormat fmt = Format(o.format);
  Corpus enroll = LoadEmbeddings(o.enroll, fmt, Subset::kEnrollment);
  Corpus trial = LoadEmbeddings(o.trial, fmt, Subset::kTrial);
  TrialList trials = MakeTrials(enroll, trial, MakeTrialPolicy(o));
  if (o.out.empty()) {
    WriteTrials(trials, std::cout);
  } else {
    SaveTrials(trials, o.out);
  }
  std::cerr << trials.NumTargets() << " target, " << trials.NumNontargets()
            << " nontarget trials\n";
  return 0;
}

int RunTrainPlda(const Options &o) {
  Corpus train = LoadEmbeddings(o.train, Format(o.format), Subset::kTraining);
  PldaTrainResult result = TrainPlda(train, o.iterations);
  for (size_t i = 0; i < result.log_likelihoods.size(); i++)
    std::cerr << "iteration " << i << " log-likelihood "
              << FormatFixed(result.log_likelihoods[i], 6) << '\n';
  SavePlda(result.model, o.out);
  return 0;
}

int RunAnonymizeXvec(const Options &o) {
  const EmbeddingFormat fmt = Format(o.format);
  Corpus input = LoadEmbeddings(o.input, fmt, Subset::kTrial);
  Corpus pool = LoadEmbeddings(o.pool, fmt, Subset::kPool);
  Plda plda(LoadPlda(o.model));
  Corpus out = AnonymizeCorpus(input, pool, plda, MakeAnonConfig(o), o.jobs);
  SaveEmbeddings(out, o.out, fmt);
  return 0;
}

int RunAnonymizeWav(const Options &o) {
  WaveBuffer wave = ReadWav(o.input);
  ShiftConfig cfg = ShiftConfig::ForSampleRate(wave.sample_rate, o.alpha);
  if (o.lpc_order) cfg.lpc_order = *o.lpc_order;
  if (o.frame_len) cfg.frame_len = *o.frame_len;
  if (o.hop) cfg.hop = *o.hop;
  ShiftStats stats;
  WaveBuffer out = AnonymizeWav(wave, cfg, &stats);
  WriteWav(out, o.out);
  std::cerr << stats.frames << " frames, " << stats.voiced_frames
            << " non-silent, max pole magnitude "
            << FormatFixed(stats.max_pole_magnitude, 6) << '\n';
  return 0;
}

int RunScore(const Options &o) {
  const EmbeddingFormat fmt = Format(o.format);
  Plda plda(LoadPlda(o.model));
  Corpus enroll = LoadEmbeddings(o.enroll, fmt, Subset::kEnrollment);
  Corpus trial = LoadEmbeddings(o.trial, fmt, Subset::kTrial);
  TrialList trials = LoadTrials(o.trials);
  ScoringOptions opts;
  opts.average_enrollment = o.average_enrollment;
  opts.jobs = o.jobs;
  ScoreSet scores = ScoreTrials(plda, enroll, trial, trials, opts);
  if (o.out.empty()) {
    WriteScores(scores, std::cout);
  } else {
    SaveScores(scores, o.out);
  }
  return 0;
}

int RunEval(const Options &o) {
  const EmbeddingFormat fmt = Format(o.format);
  Corpus pool = LoadEmbeddings(o.pool, fmt, Subset::kPool);
  Corpus enroll = LoadEmbeddings(o.enroll, fmt, Subset::kEnrollment);
  Corpus trial = LoadEmbeddings(o.trial, fmt, Subset::kTrial);

  PldaModel model;
  if (!o.model.empty()) {
    model = LoadPlda(o.model);
  } else {
    if (o.train.empty()) throw UsageError("eval needs --train or --model");
    Corpus train = LoadEmbeddings(o.train, fmt, Subset::kTraining);
    PldaTrainResult result = TrainPlda(train, o.iterations);
    std::cerr << "trained PLDA, log-likelihood "
              << FormatFixed(result.log_likelihoods.front(), 3) << " -> "
              << FormatFixed(result.log_likelihoods.back(), 3) << '\n';
    model = std::move(result.model);
  }
  Plda plda(std::move(model));
  TrialList trials = o.trials.empty()
                         ? MakeTrials(enroll, trial, MakeTrialPolicy(o))
                         : LoadTrials(o.trials);

  std::vector<Condition> conditions;
  std::stringstream ss(o.conditions);
  for (std::string tok; std::getline(ss, tok, ',');) {
    Condition c = ParseCondition(Trim(tok));
    if (std::find(conditions.begin(), conditions.end(), c) != conditions.end())
      throw UsageError("condition " + tok + " listed twice");
    conditions.push_back(c);
  }
  if (conditions.empty()) throw UsageError("no conditions given");

  HarnessOptions hopts;
  hopts.dataset = o.dataset;
  hopts.same_tag = o.same_tag;
  hopts.jobs = o.jobs;
  hopts.scoring.average_enrollment = o.average_enrollment;
  const AnonConfig anon_cfg = MakeAnonConfig(o);
  if (!o.anon_dir.empty()) std::filesystem::create_directories(o.anon_dir);

  std::vector<EvalRun> runs;
  for (Condition c : conditions) {
    std::optional<ConditionData> used;
    std::vector<EvalRun> r = RunCondition(c, enroll, trial, pool, plda, anon_cfg,
                                          trials, hopts, &used);
    runs.insert(runs.end(), r.begin(), r.end());
    if (!o.anon_dir.empty()) {
      const std::filesystem::path dir(o.anon_dir);
      const std::string name = ConditionName(c);
      if (EnrollAnonymized(c))
        SaveEmbeddings(used->enroll,
                       (dir / (name + "_enroll" + Extension(fmt))).string(), fmt);
      if (TrialAnonymized(c))
        SaveEmbeddings(used->trial,
                       (dir / (name + "_trial" + Extension(fmt))).string(), fmt);
    }
  }
  std::cout << RenderReportTable(runs);
  if (!o.records.empty()) WriteTextFile(o.records, RenderReportRecords(runs));
  return 0;
}

int RunDet(const Options &o) {
  ScoreSet scores = AttachLabels(LoadScores(o.scores), LoadTrials(o.trials));
  std::vector<double> tar = scores.TargetScores();
  std::vector<double> non = scores.NontargetScores();
  DetCurve curve = ComputeDet(tar, non);
  if (o.out.empty()) {
    WriteDet(curve, std::cout);
  } else {
    std::ofstream os(o.out, std::ios::binary);
    if (!os) throw Error("cannot open " + o.out + " for writing");
    WriteDet(curve, os);
    if (!os.flush()) throw Error("write to " + o.out + " failed");
  }
  MetricsReport m = ComputeMetrics(tar, non);
  std::cerr << "EER " << FormatFixed(100.0 * m.eer, 2) << "% min_cllr "
            << FormatFixed(m.min_cllr, 3) << " cllr " << FormatFixed(m.cllr, 3)
            << " (" << m.n_target << " target, " << m.n_nontarget
            << " nontarget)\n";
  return 0;
}

std::vector<std::string> ReadLines(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

int RunWer(const Options &o) {
  std::vector<std::string> ref = ReadLines(o.ref), hyp = ReadLines(o.hyp);
  if (ref.size() != hyp.size())
    throw Error("reference has " + std::to_string(ref.size()) +
                " lines but hypothesis has " + std::to_string(hyp.size()));
  WerResult total;
  for (size_t i = 0; i < ref.size(); i++)
    total += AlignWords(Tokenize(ref[i]), Tokenize(hyp[i]));
  if (total.ref_words == 0) throw Error("reference contains no words");
  std::cout << "WER " << FormatFixed(total.wer(), 3) << "% [ "
            << total.errors() << " / " << total.ref_words << ", "
            << total.insertions << " ins, " << total.deletions << " del, "
            << total.substitutions << " sub ]\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"speaker anonymization evaluation toolkit", "vpeval"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Options o;
  std::map<std::string, int (*)(const Options &)> handlers;
  std::string config_path;

  auto add = [&](const char *name, const char *desc, int (*fn)(const Options &)) {
    CLI::App *sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "key = value config file");
    handlers[name] = fn;
    return sub;
  };
  auto add_format = [&](CLI::App *sub) {
    sub->add_option("--format", o.format, "embedding file format: text or binary");
  };
  auto add_anon = [&](CLI::App *sub) {
    sub->add_option("--n_farthest", o.n_farthest, "farthest pool vectors (N)");
    sub->add_option("--n_select", o.n_select, "vectors averaged (N*)");
    sub->add_option("--assignment", o.assignment, "per_speaker or per_utterance");
    sub->add_option("--same_gender_pool", o.same_gender_pool,
                    "restrict the pool to the source gender");
  };
  auto add_trial_policy = [&](CLI::App *sub) {
    sub->add_option("--cross_gender", o.cross_gender,
                    "allow nontarget trials across genders");
    sub->add_option("--max_nontargets", o.max_nontargets,
                    "subsample nontarget trials to at most this many");
  };

  CLI::App *synth = add("synth", "generate a synthetic corpus", RunSynth);
  synth->add_option("--out_dir", o.out_dir, "output directory")->required();
  synth->add_option("--n_speakers", o.n_speakers);
  synth->add_option("--utts_per_speaker", o.utts_per_speaker);
  synth->add_option("--dim", o.dim);
  synth->add_option("--female_fraction", o.female_fraction);
  synth->add_option("--train_fraction", o.train_fraction);
  synth->add_option("--pool_fraction", o.pool_fraction);
  synth->add_option("--enroll_fraction", o.enroll_fraction);
  synth->add_option("--trial_fraction", o.trial_fraction);
  synth->add_option("--seed", o.seed);
  add_format(synth);

  CLI::App *mk = add("make-trials", "build a trial list", RunMakeTrials);
  mk->add_option("--enroll", o.enroll)->required();
  mk->add_option("--trial", o.trial)->required();
  mk->add_option("--out", o.out, "trial list (default: stdout)");
  mk->add_option("--seed", o.seed);
  add_trial_policy(mk);
  add_format(mk);

  CLI::App *train = add("train-plda", "train a PLDA model", RunTrainPlda);
  train->add_option("--train", o.train)->required();
  train->add_option("--out", o.out)->required();
  train->add_option("--iterations", o.iterations);
  add_format(train);

  CLI::App *ax = add("anonymize-xvec", "anonymize embeddings", RunAnonymizeXvec);
  ax->add_option("--input", o.input)->required();
  ax->add_option("--pool", o.pool)->required();
  ax->add_option("--model", o.model)->required();
  ax->add_option("--out", o.out)->required();
  ax->add_option("--seed", o.seed);
  ax->add_option("--subset_tag", o.subset_tag);
  ax->add_option("--jobs", o.jobs);
  add_anon(ax);
  add_format(ax);

  CLI::App *aw = add("anonymize-wav", "shift formants of a WAV file", RunAnonymizeWav);
  aw->add_option("--input", o.input)->required();
  aw->add_option("--out", o.out)->required();
  aw->add_option("--alpha", o.alpha, "pole angle exponent");
  aw->add_option("--lpc_order", o.lpc_order, "default: 20 at 16 kHz, scaled");
  aw->add_option("--frame_len", o.frame_len, "samples, default 25 ms");
  aw->add_option("--hop", o.hop, "samples, default 10 ms");

  CLI::App *score = add("score", "score a trial list", RunScore);
  score->add_option("--model", o.model)->required();
  score->add_option("--enroll", o.enroll)->required();
  score->add_option("--trial", o.trial)->required();
  score->add_option("--trials", o.trials)->required();
  score->add_option("--out", o.out, "score file (default: stdout)");
  score->add_option("--average_enrollment", o.average_enrollment);
  score->add_option("--jobs", o.jobs);
  add_format(score);

  CLI::App *ev = add("eval", "evaluate the oo, oa and aa conditions", RunEval);
  ev->add_option("--train", o.train, "training data (unless --model)");
  ev->add_option("--pool", o.pool)->required();
  ev->add_option("--enroll", o.enroll)->required();
  ev->add_option("--trial", o.trial)->required();
  ev->add_option("--model", o.model, "pretrained PLDA model");
  ev->add_option("--trials", o.trials, "trial list (default: generated)");
  ev->add_option("--iterations", o.iterations);
  ev->add_option("--dataset", o.dataset, "dataset label in the report");
  ev->add_option("--conditions", o.conditions, "comma-separated conditions");
  ev->add_option("--same_tag", o.same_tag,
                 "anonymize aa enrollment with the trial tag");
  ev->add_option("--average_enrollment", o.average_enrollment);
  ev->add_option("--records", o.records, "machine-readable report file");
  ev->add_option("--anon_dir", o.anon_dir, "directory for anonymized data");
  ev->add_option("--seed", o.seed);
  ev->add_option("--jobs", o.jobs);
  add_anon(ev);
  add_trial_policy(ev);
  add_format(ev);

  CLI::App *det = add("det", "DET curve from scores", RunDet);
  det->add_option("--scores", o.scores)->required();
  det->add_option("--trials", o.trials)->required();
  det->add_option("--out", o.out, "DET points (default: stdout)");

  CLI::App *wer = add("wer", "word error rate", RunWer);
  wer->add_option("--ref", o.ref)->required();
  wer->add_option("--hyp", o.hyp)->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty()) {
      CLI::App *sub = app.get_subcommand_no_throw(args[0]);
      if (sub == nullptr && args[0].rfind("-", 0) != 0)
        throw UsageError("unknown subcommand '" + args[0] + "'");
      if (sub != nullptr) InjectConfig(sub, &args);
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 1;
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 1;
  }

  CLI::App *sub = app.get_subcommands().front();
  try {
    CheckJobs(o.jobs);
    std::cerr << ProvenanceLine(sub) << '\n';
    return handlers.at(sub->get_name())(o);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
