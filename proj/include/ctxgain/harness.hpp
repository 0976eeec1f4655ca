#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ctxgain/corpus.hpp"
#include "ctxgain/errors.hpp"
#include "ctxgain/grounding.hpp"
#include "ctxgain/io.hpp"
#include "ctxgain/policysim.hpp"
#include "ctxgain/remote.hpp"
#include "ctxgain/reward.hpp"
#include "ctxgain/trainer.hpp"
#include "ctxgain/verifier.hpp"

namespace ctxgain {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitUnknownDoc = 3;
inline constexpr int kExitVerifier = 4;
inline constexpr int kExitSchema = 5;

// ---------------------------------------------------------------------------
// Verifier selection
// ---------------------------------------------------------------------------

struct VerifierChoice {
  std::string backend = "ngram";  // "ngram" | "remote"
  std::string model_file;         // load a saved n-gram model when set
  std::string corpus_file;        // fit on this text; embedded pool otherwise
  NgramVerifierConfig ngram;
  RemoteConfig remote;
};

inline std::unique_ptr<VerifierBackend> make_verifier(const VerifierChoice& c) {
  if (c.backend == "remote")
    return std::make_unique<RemoteLogprobClient>(c.remote);
  if (c.backend != "ngram")
    throw ConfigError("unknown verifier backend: " + c.backend);
  if (!c.model_file.empty())
    return std::make_unique<NgramCacheVerifier>(
        NgramCacheVerifier::load_file(c.model_file));
  if (!c.corpus_file.empty()) {
    std::ifstream is(c.corpus_file);
    if (!is) throw IoError("cannot open corpus file: " + c.corpus_file);
    return std::make_unique<NgramCacheVerifier>(fit_background(c.ngram, is));
  }
  return std::make_unique<NgramCacheVerifier>(default_verifier(c.ngram));
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline const std::vector<uint64_t>& default_bucket_edges() {
  static const std::vector<uint64_t> edges = {0,    1024,  2048,  4096,  8192,
                                              16384, 32768, 65536, 131072};
  return edges;
}

struct ScoredRecord {
  uint64_t doc_units = 0;
  uint64_t think_units = 0;
  bool correct = false;
  bool has_gold = false;
  size_t distractors = 0;
  size_t hallucinations = 0;
  double fmt = 0.0, acc = 0.0, ctx = 0.0, total = 0.0;
  std::string mode;
};

struct MetricsReport {
  struct Bucket {
    uint64_t lo = 0;
    std::optional<uint64_t> hi;  // open-ended last bucket
    size_t n = 0;
    double think_units_mean = 0.0;
    double think_units_median = 0.0;
    double accuracy = 0.0;
    double distractors_mean = 0.0;
    double hallucinations_mean = 0.0;
    std::map<size_t, size_t> distractor_histogram;
    size_t with_gold = 0;
  };
  struct ModeStats {
    size_t n = 0;
    double fmt_mean = 0.0, acc_mean = 0.0, ctx_mean = 0.0, total_mean = 0.0;
    std::vector<size_t> ctx_histogram;  // bins over [lo, hi)
    size_t ctx_below = 0, ctx_above = 0;
  };

  std::vector<uint64_t> bucket_edges;
  std::vector<Bucket> buckets;
  std::map<std::string, ModeStats> per_mode;
  double ctx_hist_lo = -1.0, ctx_hist_hi = 1.0;
  size_t ctx_hist_bins = 40;
  uint64_t verifier_calls = 0;
  size_t records = 0;
};

class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::vector<uint64_t> edges = default_bucket_edges())
      : edges_(std::move(edges)) {}

  void add(const ScoredRecord& r) { records_.push_back(r); }

  MetricsReport finalize(uint64_t verifier_calls = 0) const {
    MetricsReport rep;
    rep.bucket_edges = edges_;
    rep.verifier_calls = verifier_calls;
    rep.records = records_.size();

    for (size_t b = 0; b < edges_.size(); ++b) {
      MetricsReport::Bucket bucket;
      bucket.lo = edges_[b];
      if (b + 1 < edges_.size()) bucket.hi = edges_[b + 1];
      std::vector<uint64_t> think;
      size_t correct = 0;
      size_t distr_total = 0;
      size_t halluc_total = 0;
      for (const auto& r : records_) {
        if (r.doc_units < bucket.lo || (bucket.hi && r.doc_units >= *bucket.hi))
          continue;
        ++bucket.n;
        think.push_back(r.think_units);
        if (r.correct) ++correct;
        if (r.has_gold) {
          ++bucket.with_gold;
          distr_total += r.distractors;
          halluc_total += r.hallucinations;
          bucket.distractor_histogram[r.distractors] += 1;
        }
      }
      if (bucket.n > 0) {
        uint64_t sum = 0;
        for (uint64_t t : think) sum += t;
        bucket.think_units_mean = double(sum) / double(bucket.n);
        std::sort(think.begin(), think.end());
        bucket.think_units_median =
            think.size() % 2 ? double(think[think.size() / 2])
                             : 0.5 * double(think[think.size() / 2 - 1] +
                                            think[think.size() / 2]);
        bucket.accuracy = double(correct) / double(bucket.n);
        if (bucket.with_gold > 0) {
          bucket.distractors_mean = double(distr_total) / double(bucket.with_gold);
          bucket.hallucinations_mean =
              double(halluc_total) / double(bucket.with_gold);
        }
      }
      rep.buckets.push_back(std::move(bucket));
    }

    for (const auto& r : records_) {
      auto& m = rep.per_mode[r.mode];
      if (m.ctx_histogram.empty()) m.ctx_histogram.resize(rep.ctx_hist_bins, 0);
      ++m.n;
      m.fmt_mean += r.fmt;
      m.acc_mean += r.acc;
      m.ctx_mean += r.ctx;
      m.total_mean += r.total;
      double span = rep.ctx_hist_hi - rep.ctx_hist_lo;
      if (r.ctx < rep.ctx_hist_lo) {
        ++m.ctx_below;
      } else if (r.ctx >= rep.ctx_hist_hi) {
        ++m.ctx_above;
      } else {
        size_t bin = size_t((r.ctx - rep.ctx_hist_lo) / span *
                            double(rep.ctx_hist_bins));
        ++m.ctx_histogram[std::min(bin, rep.ctx_hist_bins - 1)];
      }
    }
    for (auto& [_, m] : rep.per_mode) {
      m.fmt_mean /= double(m.n);
      m.acc_mean /= double(m.n);
      m.ctx_mean /= double(m.n);
      m.total_mean /= double(m.n);
    }
    return rep;
  }

 private:
  std::vector<uint64_t> edges_;
  std::vector<ScoredRecord> records_;
};

inline json metrics_to_json(const MetricsReport& rep) {
  json buckets = json::array();
  for (const auto& b : rep.buckets) {
    json hist = json::object();
    for (const auto& [count, freq] : b.distractor_histogram)
      hist[std::to_string(count)] = freq;
    json jb = {{"lo", b.lo},
               {"n", b.n},
               {"think_units_mean", b.think_units_mean},
               {"think_units_median", b.think_units_median},
               {"accuracy", b.accuracy},
               {"distractors_mean", b.distractors_mean},
               {"hallucinations_mean", b.hallucinations_mean},
               {"distractor_histogram", hist},
               {"with_gold", b.with_gold}};
    jb["hi"] = b.hi ? json(*b.hi) : json(nullptr);
    buckets.push_back(std::move(jb));
  }
  json modes = json::object();
  for (const auto& [name, m] : rep.per_mode) {
    modes[name] = {{"n", m.n},
                   {"fmt_mean", m.fmt_mean},
                   {"acc_mean", m.acc_mean},
                   {"ctx_mean", m.ctx_mean},
                   {"total_mean", m.total_mean},
                   {"ctx_histogram",
                    {{"lo", rep.ctx_hist_lo},
                     {"hi", rep.ctx_hist_hi},
                     {"bins", m.ctx_histogram},
                     {"below", m.ctx_below},
                     {"above", m.ctx_above}}}};
  }
  return {{"bucket_edges", rep.bucket_edges},
          {"buckets", buckets},
          {"per_mode", modes},
          {"verifier_calls", rep.verifier_calls},
          {"records", rep.records}};
}

inline void metrics_to_csv(std::ostream& os, const MetricsReport& rep) {
  os << "bucket_lo,bucket_hi,n,think_units_mean,think_units_median,accuracy,"
        "distractors_mean,hallucinations_mean,with_gold\n";
  std::ostringstream num;
  num << std::setprecision(17);
  for (const auto& b : rep.buckets) {
    num.str("");
    num << b.lo << ',';
    if (b.hi) num << *b.hi;
    num << ',' << b.n << ',' << b.think_units_mean << ','
        << b.think_units_median << ',' << b.accuracy << ','
        << b.distractors_mean << ',' << b.hallucinations_mean << ','
        << b.with_gold;
    os << num.str() << '\n';
  }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenConfig {
  std::string out_dir = "corpus";
  std::string task = "niah";  // "niah" | "vt"
  uint32_t docs_per_stage = 100;
  uint32_t stages = 2;
  uint64_t l0 = 16384;
  uint64_t lmax = 131072;
  double depth_fraction = -1.0;  // negative: uniform random per document
  uint32_t num_distractors = 3;
  uint32_t chain_length = 3;
  uint32_t num_chains = 3;
  uint64_t seed = 42;
  std::string filler_file;  // embedded pool when empty

  json to_json() const {
    return {{"out_dir", out_dir},
            {"task", task},
            {"filler_file", filler_file},
            {"docs_per_stage", docs_per_stage},
            {"stages", stages},
            {"l0", l0},
            {"lmax", lmax},
            {"depth_fraction", depth_fraction},
            {"num_distractors", num_distractors},
            {"chain_length", chain_length},
            {"num_chains", num_chains},
            {"seed", seed}};
  }
};

namespace detail {

inline void write_meta(const std::string& path, const json& config,
                       const json& extra = json::object()) {
  json meta = {{"config", config}, {"extra", extra}};
  meta["written_at"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  std::ofstream os(path);
  if (os) os << meta.dump(2) << '\n';
}

}  // namespace detail

// Writes <out_dir>/stage<m>.jsonl per stage, lengths within (L_{m-1}, L_m].
inline int cmd_gen(const GenConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.task != "niah" && cfg.task != "vt")
      throw ConfigError("task must be 'niah' or 'vt'");
    if (cfg.stages < 1) throw ConfigError("stages must be >= 1");
    if (cfg.l0 < 1 || cfg.lmax < cfg.l0) throw ConfigError("need 1 <= L0 <= Lmax");
    if (cfg.docs_per_stage < 1) throw ConfigError("docs_per_stage must be >= 1");
    if (cfg.depth_fraction > 1.0)
      throw ConfigError("depth_fraction must be <= 1");

    std::filesystem::create_directories(cfg.out_dir);
    Rng master(cfg.seed);

    std::vector<std::string> custom_filler;
    if (!cfg.filler_file.empty()) {
      std::ifstream is(cfg.filler_file);
      if (!is) throw IoError("cannot open filler file: " + cfg.filler_file);
      custom_filler = parse_filler_lines(is);
    }
    const std::vector<std::string>* filler =
        custom_filler.empty() ? nullptr : &custom_filler;

    uint64_t prev_limit = 0;
    for (uint32_t m = 0; m < cfg.stages; ++m) {
      const uint64_t limit = stage_limit(m, cfg.l0, cfg.lmax);
      // Leave room for planted sentences so documents stay within L_m.
      const uint64_t plant_margin =
          16 + 12 * uint64_t(1 + std::max(cfg.num_distractors,
                                          cfg.chain_length * cfg.num_chains));
      if (limit <= plant_margin + 8)
        throw ConfigError("stage limit " + std::to_string(limit) +
                          " too small for planted sentences");
      const uint64_t hi = limit - plant_margin;
      const uint64_t lo = std::min(hi, std::max(prev_limit + 1, limit / 2));

      std::vector<Document> docs;
      Rng stage_rng = master.fork(m);
      for (uint32_t i = 0; i < cfg.docs_per_stage; ++i) {
        Rng doc_rng = stage_rng.fork(i);
        uint64_t units = lo + doc_rng.below(hi - lo + 1);
        char idbuf[64];
        std::snprintf(idbuf, sizeof(idbuf), "%s-m%u-%05u", cfg.task.c_str(), m,
                      i);
        if (cfg.task == "niah") {
          NiahConfig nc;
          nc.haystack_units = units;
          nc.depth_fraction = cfg.depth_fraction < 0.0 ? doc_rng.uniform01()
                                                       : cfg.depth_fraction;
          nc.num_distractors = cfg.num_distractors;
          nc.seed = doc_rng.next_u64();
          nc.id = idbuf;
          nc.filler = filler;
          docs.push_back(generate_niah(nc));
        } else {
          VtConfig vc;
          vc.haystack_units = units;
          vc.chain_length = cfg.chain_length;
          vc.num_chains = cfg.num_chains;
          vc.seed = doc_rng.next_u64();
          vc.id = idbuf;
          vc.filler = filler;
          docs.push_back(generate_vt(vc));
        }
        if (docs.back().length_units > limit)
          throw ConfigError("generated document exceeds stage limit");
      }

      std::string path = cfg.out_dir + "/stage" + std::to_string(m) + ".jsonl";
      std::ofstream os(path);
      if (!os) throw IoError("cannot write " + path);
      write_documents_jsonl(os, docs);
      out << "stage " << m << ": " << docs.size() << " documents (limit "
          << limit << ") -> " << path << "\n";
      prev_limit = limit;
    }
    detail::write_meta(cfg.out_dir + "/meta.json", cfg.to_json());
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreConfig {
  std::vector<std::string> docs_files;
  std::string traj_file;
  std::string out_file = "scored.jsonl";
  std::string report_prefix;  // default: out_file without extension
  std::string mode = "relative";
  double tau = 0.5;
  RewardWeights weights;
  VerifierChoice verifier;
  int workers = 1;
  uint64_t seed = 42;

  json to_json() const {
    return {{"docs_files", docs_files}, {"traj_file", traj_file},
            {"out_file", out_file},     {"report_prefix", report_prefix},
            {"mode", mode},             {"tau", tau},
            {"workers", workers},       {"seed", seed},
            {"backend", verifier.backend}};
  }
};

namespace detail {

struct ScoreOutcome {
  std::string line;
  ScoredRecord rec;
  int error_code = 0;
  std::string error;
};

inline ScoreOutcome score_one(const Document& doc, const DocumentIndex& index,
                              const TrajectoryLine& tl,
                              const VerifierBackend& backend,
                              const RewardMode& mode, const RewardWeights& w) {
  ScoreOutcome out;
  Trajectory traj = parse_trajectory(tl.raw);
  RewardBreakdown b = total_reward(doc, index, traj, backend, mode, w);
  out.line = scored_to_json(tl.doc_id, tl.raw, b).dump();

  out.rec.doc_units = doc.length_units;
  out.rec.think_units = traj.think ? length_units(*traj.think) : 0;
  out.rec.correct = b.acc > 0.0;
  out.rec.has_gold = !doc.gold_spans.empty();
  if (out.rec.has_gold) {
    GroundingSummary gs = grounding_summary(doc, index, traj);
    out.rec.distractors = gs.distractors;
    out.rec.hallucinations = gs.hallucinations;
  }
  out.rec.fmt = b.fmt;
  out.rec.acc = b.acc;
  out.rec.ctx = b.ctx;
  out.rec.total = b.total;
  out.rec.mode = reward_mode_name(mode);
  return out;
}

}  // namespace detail

// Scores every trajectory line against its document; output preserves
// input order regardless of worker count.
inline int cmd_score(const ScoreConfig& cfg, std::ostream& out,
                     std::ostream& err) {
  std::unique_ptr<VerifierBackend> backend;
  RewardMode mode;
  std::vector<TrajectoryLine> lines;
  std::map<std::string, Document> docs;
  try {
    mode = reward_mode_from(cfg.mode, cfg.tau);
    if (cfg.docs_files.empty()) throw ConfigError("no documents files given");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    backend = make_verifier(cfg.verifier);
    for (const auto& f : cfg.docs_files)
      for (auto& d : read_documents_file(f)) docs.emplace(d.id, std::move(d));
    std::ifstream is(cfg.traj_file);
    if (!is) throw IoError("cannot open trajectories file: " + cfg.traj_file);
    lines = read_trajectories_jsonl(is);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  auto start = std::chrono::steady_clock::now();

  // Indexes built up front for every referenced document.
  std::map<std::string, std::unique_ptr<DocumentIndex>> indexes;
  for (const auto& tl : lines) {
    auto it = docs.find(tl.doc_id);
    if (it == docs.end()) {
      err << "unknown doc_id: " << tl.doc_id << "\n";
      return kExitUnknownDoc;
    }
    auto& idx = indexes[tl.doc_id];
    if (!idx) idx = std::make_unique<DocumentIndex>(it->second.text);
  }

  std::vector<detail::ScoreOutcome> results(lines.size());
  auto worker = [&](size_t i) {
    const Document& doc = docs.at(lines[i].doc_id);
    try {
      results[i] = detail::score_one(doc, *indexes.at(lines[i].doc_id),
                                     lines[i], *backend, mode, cfg.weights);
    } catch (const RemoteError& e) {
      results[i].error_code = kExitVerifier;
      results[i].error = e.what();
    } catch (const EmptySegment& e) {
      results[i].error_code = kExitVerifier;
      results[i].error = e.what();
    } catch (const std::exception& e) {
      results[i].error_code = kExitSchema;
      results[i].error = e.what();
    }
  };

  if (cfg.workers == 1) {
    for (size_t i = 0; i < lines.size(); ++i) {
      worker(i);
      if (results[i].error_code != 0) break;
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.workers; ++w)
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < lines.size();
             i = next.fetch_add(1))
          worker(i);
      });
    for (auto& t : pool) t.join();
  }

  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].error_code != 0) {
      err << "line " << (i + 1) << ": " << results[i].error << "\n";
      return results[i].error_code;
    }
  }

  MetricsAccumulator acc;
  {
    std::ofstream os(cfg.out_file);
    if (!os) {
      err << "cannot write " << cfg.out_file << "\n";
      return kExitConfig;
    }
    for (const auto& r : results) {
      os << r.line << '\n';
      acc.add(r.rec);
    }
  }

  MetricsReport rep = acc.finalize(backend->calls());
  std::string prefix = cfg.report_prefix;
  if (prefix.empty()) {
    prefix = cfg.out_file;
    if (auto dot = prefix.rfind(".jsonl"); dot != std::string::npos)
      prefix = prefix.substr(0, dot);
    prefix += "_report";
  }
  {
    std::ofstream js(prefix + ".json");
    js << metrics_to_json(rep).dump(2) << '\n';
    std::ofstream cs(prefix + ".csv");
    metrics_to_csv(cs, rep);
  }

  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  detail::write_meta(cfg.out_file + ".meta.json", cfg.to_json(),
                     {{"verifier_calls", backend->calls()},
                      {"seconds", elapsed},
                      {"lines", lines.size()}});
  out << "scored " << lines.size() << " trajectories, verifier calls "
      << backend->calls() << " -> " << cfg.out_file << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCmdConfig {
  std::vector<std::string> docs_files;
  std::string out_dir = "train_out";
  std::string mode = "relative";
  double tau = 0.5;
  RewardWeights weights;
  TrainConfig train;
  uint32_t stages = 2;
  uint64_t l0 = 16384;
  uint64_t lmax = 131072;
  bool cumulative = true;
  bool sweep_modes = false;
  VerifierChoice verifier;

  json to_json() const {
    return {{"docs_files", docs_files},
            {"out_dir", out_dir},
            {"mode", mode},
            {"tau", tau},
            {"stages", stages},
            {"l0", l0},
            {"lmax", lmax},
            {"cumulative", cumulative},
            {"sweep_modes", sweep_modes},
            {"group_size", train.group_size},
            {"learning_rate", train.learning_rate},
            {"beta", train.beta},
            {"steps_per_stage", train.steps_per_stage},
            {"normalize_std", train.normalize_std},
            {"seed", train.seed},
            {"backend", verifier.backend}};
  }
};

inline json policy_to_json(const MixturePolicy& policy) {
  json logits, ref, probs, accuracy;
  auto p = policy.probs();
  for (size_t a = 0; a < kNumArchetypes; ++a) {
    std::string name = archetype_name(kAllArchetypes[a]);
    logits[name] = policy.logits[a];
    ref[name] = policy.ref_logits[a];
    probs[name] = p[a];
    accuracy[name] = policy.knobs.answer_accuracy[a];
  }
  return {{"logits", logits},
          {"ref_logits", ref},
          {"probs", probs},
          {"answer_accuracy", accuracy}};
}

inline int cmd_train(const TrainCmdConfig& cfg, std::ostream& out,
                     std::ostream& err) {
  try {
    if (cfg.docs_files.empty()) throw ConfigError("no documents files given");
    if (cfg.train.group_size < 2) throw ConfigError("group_size must be >= 2");
    if (cfg.train.beta < 0.0) throw ConfigError("beta must be >= 0");

    std::vector<Document> corpus;
    for (const auto& f : cfg.docs_files)
      for (auto& d : read_documents_file(f)) corpus.push_back(std::move(d));

    std::vector<std::string> warnings;
    auto stages = partition_stages(corpus, cfg.l0, cfg.lmax, cfg.stages,
                                   cfg.cumulative, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";

    auto backend = make_verifier(cfg.verifier);
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<RewardMode> modes;
    if (cfg.sweep_modes) {
      for (const char* name : {"outcome", "absolute", "threshold", "relative"})
        modes.push_back(reward_mode_from(name, cfg.tau));
    } else {
      modes.push_back(reward_mode_from(cfg.mode, cfg.tau));
    }

    for (const RewardMode& mode : modes) {
      TrainConfig tc = cfg.train;
      tc.mode = mode;
      tc.weights = cfg.weights;
      MixturePolicy policy;
      TrainLog log = run_curriculum(stages, corpus, policy, *backend, tc);

      std::string suffix =
          cfg.sweep_modes ? "_" + reward_mode_name(mode) : std::string();
      {
        std::ofstream os(cfg.out_dir + "/trainlog" + suffix + ".jsonl");
        write_trainlog_jsonl(os, log);
      }
      {
        std::ofstream os(cfg.out_dir + "/summary" + suffix + ".csv");
        write_trainlog_csv(os, log);
      }
      {
        std::ofstream os(cfg.out_dir + "/policy" + suffix + ".json");
        json pj = policy_to_json(policy);
        pj["mode"] = reward_mode_name(mode);
        pj["seed"] = tc.seed;
        os << pj.dump(2) << '\n';
      }
      auto p = policy.probs();
      out << reward_mode_name(mode) << ": " << log.steps.size()
          << " steps, final probs";
      for (size_t a = 0; a < kNumArchetypes; ++a)
        out << ' ' << archetype_name(kAllArchetypes[a]) << '='
            << json(p[a]).dump();
      out << "\n";
    }
    detail::write_meta(cfg.out_dir + "/meta.json", cfg.to_json(),
                       {{"verifier_calls", backend->calls()}});
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EmptyStage& e) {
    err << "empty stage: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const RemoteError& e) {
    err << "verifier error: " << e.what() << "\n";
    return kExitVerifier;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportConfig {
  std::string scored_file;    // scored JSONL input, or
  std::string trainlog_file;  // train log input
  std::vector<std::string> docs_files;  // required for scored reports
  std::string out_prefix = "report";
};

inline int cmd_report(const ReportConfig& cfg, std::ostream& out,
                      std::ostream& err) {
  try {
    if (!cfg.trainlog_file.empty()) {
      std::ifstream is(cfg.trainlog_file);
      if (!is) throw IoError("cannot open train log: " + cfg.trainlog_file);
      auto steps = read_jsonl(is, "trainlog");
      if (steps.empty()) {
        err << "warning: empty train log, writing empty report\n";
      }
      // Per-stage summary: steps, mean reward, final probs and KL.
      std::map<uint32_t, json> stages;
      std::map<uint32_t, std::pair<double, size_t>> reward_sums;
      for (const auto& s : steps) {
        if (!s.contains("stage") || !s.contains("arm_probs"))
          throw SchemaError("train log line lacks stage/arm_probs");
        uint32_t m = s["stage"].get<uint32_t>();
        auto& sum = reward_sums[m];
        sum.first += s["mean_reward"].get<double>();
        sum.second += 1;
        stages[m] = {{"stage", m},
                     {"steps", sum.second},
                     {"mean_reward", sum.first / double(sum.second)},
                     {"final_arm_probs", s["arm_probs"]},
                     {"final_kl", s["kl"]}};
      }
      json arr = json::array();
      for (auto& [_, sj] : stages) arr.push_back(sj);
      std::ofstream js(cfg.out_prefix + ".json");
      js << json{{"stages", arr}}.dump(2) << '\n';
      std::ofstream cs(cfg.out_prefix + ".csv");
      cs << "stage,steps,mean_reward,final_kl\n";
      std::ostringstream num;
      num << std::setprecision(17);
      for (auto& [m, sj] : stages) {
        num.str("");
        num << m << ',' << sj["steps"].get<size_t>() << ','
            << sj["mean_reward"].get<double>() << ','
            << sj["final_kl"].get<double>();
        cs << num.str() << '\n';
      }
      out << "train report: " << stages.size() << " stages -> "
          << cfg.out_prefix << ".json\n";
      return kExitOk;
    }

    if (cfg.scored_file.empty())
      throw ConfigError("need a scored file or a train log");
    std::ifstream is(cfg.scored_file);
    if (!is) throw IoError("cannot open scored file: " + cfg.scored_file);
    auto rows = read_jsonl(is, "scored");
    if (rows.empty()) {
      err << "warning: empty input, writing empty report\n";
      MetricsReport rep = MetricsAccumulator().finalize();
      std::ofstream js(cfg.out_prefix + ".json");
      js << metrics_to_json(rep).dump(2) << '\n';
      std::ofstream cs(cfg.out_prefix + ".csv");
      metrics_to_csv(cs, rep);
      return kExitOk;
    }

    for (const auto& row : rows)
      for (const char* key : {"doc_id", "raw", "mode", "reward"})
        if (!row.contains(key))
          throw SchemaError(std::string("scored line lacks '") + key + "'");

    if (cfg.docs_files.empty())
      throw ConfigError("scored reports need the documents files");
    std::map<std::string, Document> docs;
    for (const auto& f : cfg.docs_files)
      for (auto& d : read_documents_file(f)) docs.emplace(d.id, std::move(d));
    std::map<std::string, std::unique_ptr<DocumentIndex>> indexes;

    MetricsAccumulator acc;
    for (const auto& row : rows) {
      const std::string doc_id = row["doc_id"].get<std::string>();
      auto dit = docs.find(doc_id);
      if (dit == docs.end()) {
        err << "unknown doc_id: " << doc_id << "\n";
        return kExitUnknownDoc;
      }
      const Document& doc = dit->second;
      auto& idx = indexes[doc_id];
      if (!idx) idx = std::make_unique<DocumentIndex>(doc.text);

      Trajectory traj = parse_trajectory(row["raw"].get<std::string>());
      const json& rw = row["reward"];
      ScoredRecord rec;
      rec.doc_units = doc.length_units;
      rec.think_units = traj.think ? length_units(*traj.think) : 0;
      rec.fmt = rw.at("fmt").get<double>();
      rec.acc = rw.at("acc").get<double>();
      rec.ctx = rw.at("ctx").get<double>();
      rec.total = rw.at("total").get<double>();
      rec.correct = rec.acc > 0.0;
      rec.mode = row["mode"].get<std::string>();
      rec.has_gold = !doc.gold_spans.empty();
      if (rec.has_gold) {
        GroundingSummary gs = grounding_summary(doc, *idx, traj);
        rec.distractors = gs.distractors;
        rec.hallucinations = gs.hallucinations;
      }
      acc.add(rec);
    }

    MetricsReport rep = acc.finalize();
    std::ofstream js(cfg.out_prefix + ".json");
    js << metrics_to_json(rep).dump(2) << '\n';
    std::ofstream cs(cfg.out_prefix + ".csv");
    metrics_to_csv(cs, rep);
    out << "report: " << rows.size() << " scored lines -> " << cfg.out_prefix
        << ".json\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const json::exception& e) {
    err << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace ctxgain
