// boxel: train, evaluate, check, and visualize box-geometry embeddings of EL
// ontologies. Single binary with subcommands; every run writes a manifest so
// results can be reproduced from (inputs, seed).
//
// Exit codes: 0 success (and soundness pass), 1 soundness-check failure,
// 2 usage or I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "boxel/evaluation.hpp"
#include "boxel/geometry.hpp"
#include "boxel/model.hpp"
#include "boxel/ontology.hpp"
#include "boxel/plot.hpp"
#include "boxel/training.hpp"

namespace fs = std::filesystem;
using namespace boxel;

namespace {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Settings = std::vector<std::pair<std::string, std::string>>;

std::string settings_digest(const std::string& command, const Settings& settings) {
  std::string blob = command;
  for (const auto& [k, v] : settings) blob += ";" + k + "=" + v;
  return hex64(fnv1a64(blob));
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::vector<std::string>& inputs, const std::string& digest,
                    const Settings& settings) {
  std::ofstream out(out_dir / "manifest.txt");
  if (!out) throw std::runtime_error("cannot write " + (out_dir / "manifest.txt").string());
  out << "command " << command << "\n";
  out << "created " << utc_timestamp() << "\n";
  out << "config_digest " << digest << "\n";
  for (const std::string& input : inputs) out << "input " << fs::absolute(input).string() << "\n";
  out << "output " << fs::absolute(out_dir).string() << "\n";
  for (const auto& [k, v] : settings) out << k << " " << v << "\n";
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Ontology load_ontology_checked(const std::string& path) {
  Ontology o = parse_ontology_file(path);
  std::vector<std::string> problems = validate_el(o);
  if (!problems.empty()) {
    std::string message = path + " is not a valid EL ontology:";
    for (const std::string& p : problems) message += "\n  " + p;
    throw std::runtime_error(message);
  }
  return o;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string ontology;
  std::string out = "boxel-out";
  TrainConfig cfg;
  bool no_negatives = false;
  bool no_square = false;
  std::string norm = "l2";
};

int run_train(const TrainArgs& args) {
  Ontology ontology = load_ontology_checked(args.ontology);

  TrainConfig cfg = args.cfg;
  if (args.no_negatives) cfg.negatives_per_positive = 0;
  cfg.loss.square_positive_term = !args.no_square;
  cfg.loss.norm = args.norm == "l1" ? Norm::L1 : Norm::L2;

  Settings settings = {
      {"dim", std::to_string(cfg.dim)},
      {"gamma", format_double(cfg.gamma)},
      {"lambda", format_double(cfg.lambda)},
      {"learning_rate", format_double(cfg.learning_rate)},
      {"epochs", std::to_string(cfg.epochs)},
      {"batch_size", std::to_string(cfg.batch_size)},
      {"negatives_per_positive", std::to_string(cfg.negatives_per_positive)},
      {"seed", std::to_string(cfg.seed)},
      {"norm", args.norm},
      {"square_positive_term", cfg.loss.square_positive_term ? "true" : "false"},
      {"negative_loss_per_coordinate",
       cfg.loss.negative_loss_per_coordinate ? "true" : "false"},
      {"min_offset", format_double(cfg.loss.min_offset)},
      {"threads", std::to_string(cfg.threads)},
  };
  std::string digest = settings_digest("train", settings);
  fs::path out_dir = prepare_out_dir(args.out);

  auto save = [&](const fs::path& path, const EmbeddingModel& model, std::uint64_t epoch,
                  double final_loss) {
    Checkpoint ck;
    ck.model = model;
    ck.epoch = epoch;
    ck.final_loss = final_loss;
    ck.seed = cfg.seed;
    ck.config_digest = digest;
    save_checkpoint(ck, path.string());
  };

  TrainResult result = train(ontology, cfg, [&](std::size_t epoch, const EmbeddingModel& m) {
    if (epoch == cfg.epochs) return;  // the final model is written below
    save(out_dir / ("checkpoint-epoch-" + std::to_string(epoch) + ".ckpt"), m, epoch, 0.0);
  });

  double final_loss = result.trace.empty() ? 0.0 : result.trace.back().total;
  save(out_dir / "model.ckpt", result.model, cfg.epochs, final_loss);

  {
    std::ofstream csv(out_dir / "loss_trace.csv");
    if (!csv) throw std::runtime_error("cannot write loss_trace.csv");
    csv << "epoch,mean_positive,mean_negative,mean_regularization,total,skipped\n";
    for (const EpochStats& e : result.trace)
      csv << e.epoch << ',' << format_double(e.mean_positive) << ','
          << format_double(e.mean_negative) << ',' << format_double(e.mean_regularization)
          << ',' << format_double(e.total) << ',' << e.skipped << "\n";
  }
  write_manifest(out_dir, "train", {args.ontology}, digest, settings);

  std::cout << "trained " << cfg.epochs << " epochs on " << ontology.axioms.size()
            << " axioms; final objective " << format_double(final_loss) << "\n"
            << "checkpoint: " << (out_dir / "model.ckpt").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string checkpoint;
  std::vector<std::string> tests;
  std::string tasks = "all";
  std::string out = "boxel-out";
  std::string selection_metric = "mrr";
  double big_constant = 1e4;
  bool strict_empty = false;
  int threads = 0;
};

double metric_by_name(const RankingReport& r, const std::string& name) {
  if (name == "mrr") return r.mrr;
  if (name == "hits1") return r.hits1;
  if (name == "hits10") return r.hits10;
  if (name == "hits100") return r.hits100;
  if (name == "median") return r.median;
  if (name == "mean_rank") return r.mean_rank;
  if (name == "auc") return r.auc;
  throw std::runtime_error("unknown selection metric '" + name + "'");
}

int run_eval(const EvalArgs& args) {
  Checkpoint ck = load_checkpoint(args.checkpoint);
  TestSplit split = load_test_split(args.tests);

  std::vector<std::string> missing = unknown_names(split, ck.model);
  if (!missing.empty()) {
    std::string message = "test split names unknown to the checkpoint:";
    for (const std::string& name : missing) message += " " + name;
    throw std::runtime_error(message);
  }

  std::vector<TaskKind> kinds;
  if (args.tasks == "all") {
    kinds = {TaskKind::RhsAtomic, TaskKind::LhsAtomic, TaskKind::RhsComplex,
             TaskKind::LhsComplex, TaskKind::Nf1, TaskKind::Nf2, TaskKind::Nf3,
             TaskKind::Nf4};
  } else {
    std::stringstream ss(args.tasks);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::optional<TaskKind> kind = parse_task_kind(item);
      if (!kind) throw std::runtime_error("unknown task '" + item + "'");
      kinds.push_back(*kind);
    }
  }
  metric_by_name(RankingReport{}, args.selection_metric);  // validate the name early

  ScoreOptions opts;
  opts.big_constant = args.big_constant;
  opts.empty_lhs = args.strict_empty ? EmptyLhsRule::AnyMasked : EmptyLhsRule::AllMasked;

  Settings settings = {
      {"tasks", args.tasks},
      {"big_constant", format_double(args.big_constant)},
      {"strict_empty", args.strict_empty ? "true" : "false"},
      {"selection_metric", args.selection_metric},
      {"threads", std::to_string(args.threads)},
  };
  std::string digest = settings_digest("eval", settings);
  fs::path out_dir = prepare_out_dir(args.out);

  std::vector<std::pair<std::string, RankingReport>> rows;
  for (TaskKind kind : kinds) {
    RankingTask task = build_ranking_task(kind, split.axioms, ck.model.concept_names);
    if (task.queries.empty()) {
      std::cout << "task " << task_kind_name(kind) << ": no matching queries, skipped\n";
      continue;
    }
    if (task.candidates.size() < 2) {
      std::cout << "task " << task_kind_name(kind) << ": fewer than 2 candidates, skipped\n";
      continue;
    }
    std::vector<double> ranks = rank_queries(task, ck.model, opts, args.threads);
    RankingReport report = aggregate_metrics(ranks, task.candidates.size());
    rows.emplace_back(task_kind_name(kind), report);

    std::ofstream kv(out_dir / ("report-" + std::string(task_kind_name(kind)) + ".kv"));
    if (!kv) throw std::runtime_error("cannot write task report");
    kv << report_key_values(task_kind_name(kind), report);
  }

  std::string table = report_table(rows);
  {
    std::ofstream rt(out_dir / "report.txt");
    if (!rt) throw std::runtime_error("cannot write report.txt");
    rt << table;
  }
  std::vector<std::string> inputs = {args.checkpoint};
  inputs.insert(inputs.end(), args.tests.begin(), args.tests.end());
  write_manifest(out_dir, "eval", inputs, digest, settings);

  std::cout << table;
  for (const auto& [label, report] : rows)
    std::cout << "selection(" << args.selection_metric << ") " << label << " "
              << format_double(metric_by_name(report, args.selection_metric)) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// check

struct CheckArgs {
  std::string checkpoint;
  std::string ontology;
  double tol = 1e-2;
  std::string norm = "l2";
};

int run_check(const CheckArgs& args) {
  Checkpoint ck = load_checkpoint(args.checkpoint);
  Ontology ontology = load_ontology_checked(args.ontology);
  Norm norm = args.norm == "l1" ? Norm::L1 : Norm::L2;

  SoundnessReport report = soundness_report(ontology, ck.model, args.tol, norm);
  for (const auto& entry : report.entries) {
    std::cout << (entry.satisfied ? "SAT      " : "VIOLATED ") << "residual="
              << format_double(entry.residual) << "  " << serialize(entry.axiom) << "\n";
  }
  std::cout << "sound: " << (report.sound ? "yes" : "no") << " (" << report.violated
            << " of " << report.entries.size() << " axioms violated, tol "
            << format_double(args.tol) << ")\n";
  return report.sound ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string dims = "1,2,5,10";
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_simulate(const SimulateArgs& args) {
  if (args.samples == 0) throw CLI::ValidationError("--samples", "must be at least 1");
  std::vector<std::size_t> dims;
  std::stringstream ss(args.dims);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(std::stoul(item));

  std::printf("%4s %10s %12s %12s %12s\n", "n", "samples", "empirical", "analytic",
              "stderr");
  for (std::size_t n : dims) {
    double analytic = std::pow(2.0 / 3.0, static_cast<double>(n));
    double empirical =
        monte_carlo_intersection_probability(n, args.samples, args.seed, args.threads);
    double se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(args.samples));
    std::printf("%4zu %10zu %12.6f %12.4e %12.4e", n, args.samples, empirical, analytic, se);
    if (analytic < 1.6e-9) std::printf("  (analytic < 1.6e-09: hits are not expected)");
    std::printf("\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// plot2d

struct PlotArgs {
  std::string checkpoint;
  std::string out = "boxel-out";
};

int run_plot(const PlotArgs& args) {
  Checkpoint ck = load_checkpoint(args.checkpoint);
  std::string svg = render_svg(ck.model);  // throws unless dim == 2
  fs::path out_dir = prepare_out_dir(args.out);
  std::ofstream out(out_dir / "model.svg", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model.svg");
  out << svg;

  Settings settings = {{"checkpoint_digest", ck.config_digest},
                       {"seed", std::to_string(ck.seed)}};
  write_manifest(out_dir, "plot2d", {args.checkpoint},
                 settings_digest("plot2d", settings), settings);
  std::cout << "wrote " << (out_dir / "model.svg").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"box-geometry embeddings for EL ontologies"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (INI; [subcommand] sections; flags win)");

  int rc = 0;
  auto guarded = [&rc](auto fn) {
    try {
      rc = fn();
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      rc = 2;
    }
  };

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Fit box embeddings to an ontology");
  train_cmd->add_option("--ontology", train_args.ontology, "Ontology file")->required();
  train_cmd->add_option("--out", train_args.out, "Output directory");
  train_cmd->add_option("--dim", train_args.cfg.dim, "Embedding dimension");
  train_cmd->add_option("--gamma", train_args.cfg.gamma, "Inclusion margin");
  train_cmd->add_option("--lambda", train_args.cfg.lambda, "Regularization weight");
  train_cmd->add_option("--lr", train_args.cfg.learning_rate, "Learning rate");
  train_cmd->add_option("--epochs", train_args.cfg.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", train_args.cfg.batch_size, "Axioms per batch");
  train_cmd->add_option("--negatives", train_args.cfg.negatives_per_positive,
                        "Negatives per eligible axiom");
  train_cmd->add_flag("--no-negatives", train_args.no_negatives,
                      "Disable negative sampling");
  train_cmd->add_option("--seed", train_args.cfg.seed, "Random seed");
  train_cmd->add_option("--threads", train_args.cfg.threads,
                        "Worker threads (0 = default, 1 = serial)");
  train_cmd->add_option("--norm", train_args.norm, "Loss norm: l2 or l1")
      ->check(CLI::IsMember({"l2", "l1"}));
  train_cmd->add_flag("--no-square", train_args.no_square,
                      "Do not square the positive term");
  train_cmd->add_flag("--negative-per-coordinate",
                      train_args.cfg.loss.negative_loss_per_coordinate,
                      "Average the negative loss per coordinate");
  train_cmd->add_option("--min-offset", train_args.cfg.loss.min_offset,
                        "Penalize concept offsets below this value");
  train_cmd->add_option("--checkpoint-every", train_args.cfg.checkpoint_every,
                        "Write a checkpoint every N epochs");
  train_cmd->callback([&] { guarded([&] { return run_train(train_args); }); });

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Rank test axioms against a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Model checkpoint")->required();
  eval_cmd->add_option("--test", eval_args.tests, "Test split file (repeatable)")
      ->required();
  eval_cmd->add_option("--tasks", eval_args.tasks,
                       "Comma list of rhs-atomic,lhs-atomic,rhs-complex,lhs-complex,"
                       "nf1,nf2,nf3,nf4, or 'all'");
  eval_cmd->add_option("--out", eval_args.out, "Output directory");
  eval_cmd->add_option("--big-constant", eval_args.big_constant,
                       "Penalty for coordinates missing from the RHS");
  eval_cmd->add_flag("--strict-empty", eval_args.strict_empty,
                     "Treat any masked component as an empty LHS");
  eval_cmd->add_option("--selection-metric", eval_args.selection_metric,
                       "Metric echoed for model selection")
      ->check(CLI::IsMember({"mrr", "hits1", "hits10", "hits100", "median", "mean_rank",
                             "auc"}));
  eval_cmd->add_option("--threads", eval_args.threads, "Worker threads");
  eval_cmd->callback([&] { guarded([&] { return run_eval(eval_args); }); });

  CheckArgs check_args;
  CLI::App* check_cmd =
      app.add_subcommand("check", "Verify an ontology holds in a checkpoint's geometry");
  check_cmd->add_option("--checkpoint", check_args.checkpoint, "Model checkpoint")
      ->required();
  check_cmd->add_option("--ontology", check_args.ontology, "Ontology file")->required();
  check_cmd->add_option("--tol", check_args.tol, "Residual tolerance");
  check_cmd->add_option("--norm", check_args.norm, "Residual norm: l2 or l1")
      ->check(CLI::IsMember({"l2", "l1"}));
  check_cmd->callback([&] { guarded([&] { return run_check(check_args); }); });

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Estimate random box-intersection probabilities");
  sim_cmd->add_option("--dims", sim_args.dims, "Comma list of dimensions");
  sim_cmd->add_option("--samples", sim_args.samples, "Sample count per dimension");
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed");
  sim_cmd->add_option("--threads", sim_args.threads, "Worker threads");
  sim_cmd->callback([&] { guarded([&] { return run_simulate(sim_args); }); });

  PlotArgs plot_args;
  CLI::App* plot_cmd = app.add_subcommand("plot2d", "Render a 2-D checkpoint as SVG");
  plot_cmd->add_option("--checkpoint", plot_args.checkpoint, "Model checkpoint")
      ->required();
  plot_cmd->add_option("--out", plot_args.out, "Output directory");
  plot_cmd->callback([&] { guarded([&] { return run_plot(plot_args); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
