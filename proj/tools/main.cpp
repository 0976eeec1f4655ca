#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ctxgain/harness.hpp"

namespace {

void add_verifier_options(CLI::App* cmd, ctxgain::VerifierChoice& v) {
  cmd->add_option("--backend", v.backend, "verifier backend: ngram | remote")
      ->capture_default_str();
  cmd->add_option("--model", v.model_file, "saved n-gram model file to load");
  cmd->add_option("--fit-corpus", v.corpus_file,
                  "text file to fit the background model on "
                  "(embedded pool when omitted)");
  cmd->add_option("--order", v.ngram.order, "n-gram order")
      ->capture_default_str();
  cmd->add_option("--lambda", v.ngram.lambda, "context cache weight in [0,1]")
      ->capture_default_str();
  cmd->add_flag_function(
      "--no-lowercase",
      [&v](int64_t) { v.ngram.tokenizer.lowercase = false; },
      "keep case when tokenizing for the verifier");
  cmd->add_option("--endpoint", v.remote.endpoint,
                  "remote verifier base URL, e.g. http://127.0.0.1:8311");
  cmd->add_option("--remote-path", v.remote.path, "completions path")
      ->capture_default_str();
  cmd->add_option("--remote-model", v.remote.model, "remote model name");
  cmd->add_option("--separator", v.remote.separator,
                  "separator between context and segment");
  cmd->add_option("--timeout", v.remote.timeout_seconds,
                  "remote timeout in seconds")
      ->capture_default_str();
}

void add_weight_options(CLI::App* cmd, ctxgain::RewardWeights& w) {
  cmd->add_option("--w-fmt", w.fmt, "format reward weight")
      ->capture_default_str();
  cmd->add_option("--w-acc", w.acc, "accuracy reward weight")
      ->capture_default_str();
  cmd->add_option("--w-ctx", w.ctx, "context reward weight")
      ->capture_default_str();
  cmd->add_flag("--floor-gain", w.floor_gain_at_zero,
                "clamp negative relative gains at zero");
  cmd->add_flag("--gate-ctx", w.gate_ctx_on_format,
                "forfeit the context reward when the format is invalid");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence-grounded reward lab for long-context tasks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "declarative config file (INI format)");

  ctxgain::GenConfig gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate synthetic corpora");
  cmd_gen->add_option("--out-dir", gen.out_dir, "output directory")
      ->capture_default_str();
  cmd_gen->add_option("--task", gen.task, "task kind: niah | vt")
      ->capture_default_str();
  cmd_gen->add_option("--docs-per-stage", gen.docs_per_stage, "documents per stage")
      ->capture_default_str();
  cmd_gen->add_option("--stages", gen.stages, "curriculum stage count")
      ->capture_default_str();
  cmd_gen->add_option("--l0", gen.l0, "stage-0 length limit in units")
      ->capture_default_str();
  cmd_gen->add_option("--lmax", gen.lmax, "maximum length limit in units")
      ->capture_default_str();
  cmd_gen->add_option("--depth", gen.depth_fraction,
                      "needle depth fraction; negative = random per doc")
      ->capture_default_str();
  cmd_gen->add_option("--distractors", gen.num_distractors,
                      "distractor needles per NIAH document")
      ->capture_default_str();
  cmd_gen->add_option("--chain-length", gen.chain_length, "VT chain length")
      ->capture_default_str();
  cmd_gen->add_option("--num-chains", gen.num_chains, "VT chain count")
      ->capture_default_str();
  cmd_gen->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  cmd_gen->add_option("--filler-file", gen.filler_file,
                      "filler sentences, one per line (embedded pool when "
                      "omitted)");

  ctxgain::ScoreConfig score;
  auto* cmd_score = app.add_subcommand("score", "score trajectory files");
  cmd_score->add_option("--docs", score.docs_files, "documents JSONL file(s)")
      ->required();
  cmd_score->add_option("--trajectories", score.traj_file,
                        "trajectories JSONL file")
      ->required();
  cmd_score->add_option("--out", score.out_file, "scored JSONL output")
      ->capture_default_str();
  cmd_score->add_option("--report", score.report_prefix,
                        "metrics report prefix (json + csv)");
  cmd_score->add_option("--mode", score.mode,
                        "reward mode: outcome | absolute | threshold | relative")
      ->capture_default_str();
  cmd_score->add_option("--tau", score.tau, "threshold mode cutoff")
      ->capture_default_str();
  cmd_score->add_option("--workers", score.workers, "scoring worker threads")
      ->capture_default_str();
  cmd_score->add_option("--seed", score.seed, "seed recorded in outputs")
      ->capture_default_str();
  std::string save_model;
  cmd_score->add_option("--save-model", save_model,
                        "write the fitted n-gram model to this file");
  add_weight_options(cmd_score, score.weights);
  add_verifier_options(cmd_score, score.verifier);

  ctxgain::TrainCmdConfig train;
  auto* cmd_train = app.add_subcommand("train", "run the toy RL loop");
  cmd_train->add_option("--docs", train.docs_files, "documents JSONL file(s)")
      ->required();
  cmd_train->add_option("--out-dir", train.out_dir, "output directory")
      ->capture_default_str();
  cmd_train->add_option("--mode", train.mode, "reward mode")
      ->capture_default_str();
  cmd_train->add_option("--tau", train.tau, "threshold mode cutoff")
      ->capture_default_str();
  cmd_train->add_flag("--sweep-modes", train.sweep_modes,
                      "train once per reward mode on the shared corpus");
  cmd_train->add_option("--group-size", train.train.group_size,
                        "rollout group size")
      ->capture_default_str();
  cmd_train->add_option("--lr", train.train.learning_rate, "logit learning rate")
      ->capture_default_str();
  cmd_train->add_option("--beta", train.train.beta, "KL penalty coefficient")
      ->capture_default_str();
  cmd_train->add_option("--steps-per-stage", train.train.steps_per_stage,
                        "training steps per curriculum stage")
      ->capture_default_str();
  cmd_train->add_flag("--normalize-std", train.train.normalize_std,
                      "divide advantages by the group std");
  cmd_train->add_option("--stages", train.stages, "curriculum stage count")
      ->capture_default_str();
  cmd_train->add_option("--l0", train.l0, "stage-0 length limit in units")
      ->capture_default_str();
  cmd_train->add_option("--lmax", train.lmax, "maximum length limit in units")
      ->capture_default_str();
  bool disjoint = false;
  cmd_train->add_flag("--disjoint-stages", disjoint,
                      "stages use only newly admitted documents");
  cmd_train->add_option("--seed", train.train.seed, "training seed")
      ->capture_default_str();
  add_weight_options(cmd_train, train.weights);
  add_verifier_options(cmd_train, train.verifier);

  ctxgain::ReportConfig report;
  auto* cmd_report = app.add_subcommand("report", "aggregate metrics reports");
  cmd_report->add_option("--scored", report.scored_file, "scored JSONL input");
  cmd_report->add_option("--trainlog", report.trainlog_file,
                         "train log JSONL input");
  cmd_report->add_option("--docs", report.docs_files,
                         "documents JSONL file(s), required for scored input");
  cmd_report->add_option("--out", report.out_prefix, "report prefix")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ctxgain::kExitConfig;
  }

  if (cmd_gen->parsed()) return ctxgain::cmd_gen(gen, std::cout, std::cerr);
  if (cmd_score->parsed()) {
    if (!save_model.empty() && score.verifier.backend == "ngram") {
      try {
        auto backend = ctxgain::make_verifier(score.verifier);
        static_cast<ctxgain::NgramCacheVerifier*>(backend.get())
            ->save_file(save_model);
      } catch (const std::exception& e) {
        std::cerr << "cannot save model: " << e.what() << "\n";
        return ctxgain::kExitConfig;
      }
    }
    return ctxgain::cmd_score(score, std::cout, std::cerr);
  }
  if (cmd_train->parsed()) {
    train.cumulative = !disjoint;
    return ctxgain::cmd_train(train, std::cout, std::cerr);
  }
  if (cmd_report->parsed())
    return ctxgain::cmd_report(report, std::cout, std::cerr);
  return ctxgain::kExitConfig;
}
