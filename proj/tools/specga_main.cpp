#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "specga/errors.hpp"
#include "specga/harness.hpp"

namespace {

using namespace specga;

int cmd_train(const std::string& family_str, const std::string& operator_str, int hidden_depth,
              std::uint64_t seed, const std::string& out, int dimension, int n_train,
              const TrainConfig& base, double parent_radius) {
  const Family family = family_from_string(family_str);
  const OperatorKind kind = operator_kind_from_string(operator_str);
  int dim = dimension, nt = n_train;
  if (dim == 0) dim = family == Family::LogReg ? 2 : 5;
  if (nt == 0) nt = family == Family::LogReg ? 20 : 0;
  TrainConfig cfg = base;
  cfg.seed = seed;
  const TrainedOperator op =
      train_operator(family, kind, dim, nt, hidden_depth, cfg, parent_radius);
  save_operator(op, out);
  std::cout << "trained " << operator_str << " on " << family_str
            << ", held-out target mse " << op.final_heldout_loss << "\n"
            << "model: " << out << "\nmanifest: " << manifest_path_for(out) << "\n";
  return 0;
}

ReportFormat format_for_path(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return ReportFormat::Csv;
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return ReportFormat::Json;
  throw ConfigError("output path must end in .csv or .json: " + path);
}

int cmd_bench(const std::string& config_path, std::string out) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (out.empty()) out = cfg.output;
  if (out.empty()) throw ConfigError("no output path (pass --out or set \"output\" in config)");
  const ReportFormat format = format_for_path(out);
  const ExperimentReport report = run_experiment(cfg);
  emit_report(report, format, out);
  std::cout << "wrote " << out << " (" << report.wall_clock_seconds << " s)\n";
  return 0;
}

int cmd_table1(const std::string& config_path, std::string out, std::vector<int> h_list) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (out.empty()) out = cfg.output;
  if (out.empty()) throw ConfigError("no output path (pass --out or set \"output\" in config)");
  if (h_list.empty()) h_list = {1, 3, 5, 10};
  const auto rows = table1_sweep(h_list, cfg);
  write_table_csv(rows, out);
  for (const RecognitionRow& r : rows)
    std::cout << "H=" << r.hidden_depth << "  netd(train/heldout) " << r.netd_training << "/"
              << r.netd_heldout << "  oracle " << r.oracle_training << "/" << r.oracle_heldout
              << "\n";
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_search(const std::string& family_str, const std::string& strategy, std::uint64_t seed,
               const std::string& model_path, int dimension, int n_train, GaConfig ga) {
  const Family family = family_from_string(family_str);
  int dim = dimension, nt = n_train;
  if (dim == 0) dim = family == Family::LogReg ? 2 : 5;
  if (nt == 0) nt = family == Family::LogReg ? 20 : 0;
  if (ga.survivors < 2 || ga.children < 1 || ga.mutation_sigma <= 0.0 || ga.generations < 0)
    throw ConfigError("bad search settings: need survivors >= 2, children >= 1, sigma > 0");

  const TaskInstance task =
      TaskInstance::sample(family, dim, nt, derive_seed(seed, seed_tags::kTask, 0));
  Rng rng(derive_seed(seed, seed_tags::kStrategy, 0, 1));

  SearchTrace trace;
  if (strategy == "blind") {
    trace = blind_search(task, ga.generations, ga.children, rng, metric);
  } else if (strategy == "classic-ga") {
    trace = classic_ga(task, ga, rng, metric);
  } else {
    if (model_path.empty()) throw ModelError("strategy " + strategy + " needs --model");
    const TrainedOperator op = load_operator(model_path);
    if (op.family != family || op.dimension != dim ||
        (family == Family::LogReg && op.n_train != nt))
      throw ModelError("model " + model_path + " does not match the requested task");
    if (strategy == "net-d") trace = netd_solve(op.net, task, ga.generations, metric);
    else if (strategy == "net-ga") trace = net_ga(op.net, task, ga, rng, metric);
    else if (strategy == "net-1p") trace = net_1p(op.net, task, ga, rng, metric);
    else throw ConfigError("unknown strategy: " + strategy);
  }

  std::printf("strategy=%s family=%s dimension=%d seed=%llu evaluations_per_step=%d\n",
              trace.strategy.c_str(), family_str.c_str(), dim,
              static_cast<unsigned long long>(seed), trace.evaluations_per_step);
  std::printf("generation,best_fitness,best_error\n");
  for (std::size_t g = 0; g < trace.best_fitness.size(); ++g)
    std::printf("%zu,%.17g,%.17g\n", g, trace.best_fitness[g], trace.best_error[g]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-specialized search: trainable crossover operators and direct "
               "solution maps benchmarked against blind search and a classic GA"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train an operator network and save it");
  std::string family_str, operator_str, out;
  int hidden_depth = 5, dimension = 0, n_train = 0;
  std::uint64_t seed = 0;
  TrainConfig tc;
  double parent_radius = 1.0;
  std::string optimizer_str = "adaptive-moments";
  train->add_option("--family", family_str, "quadratic | linear | logreg")->required();
  train->add_option("--operator", operator_str, "net-d | net-ga | net-1p")->required();
  train->add_option("--hidden-depth", hidden_depth, "Hidden layer count H");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--out", out, "Model output path")->required();
  train->add_option("--dimension", dimension, "Task dimension N (family default if omitted)");
  train->add_option("--n-train", n_train, "Training set size (logreg)");
  train->add_option("--steps", tc.steps, "Optimizer steps");
  train->add_option("--batch-size", tc.batch_size, "Batch size");
  train->add_option("--learning-rate", tc.learning_rate, "Learning rate");
  train->add_option("--optimizer", optimizer_str, "plain-sgd | adaptive-moments");
  train->add_option("--parent-radius", parent_radius, "Parent sampling radius (net-ga/net-1p)");

  // bench
  auto* bench = app.add_subcommand("bench", "Run an experiment and emit a report");
  std::string bench_config, bench_out;
  bench->add_option("--config", bench_config, "Experiment config JSON")->required();
  bench->add_option("--out", bench_out, "Report path (.csv or .json)");

  // table1
  auto* table = app.add_subcommand("table1", "Recognition sweep over hidden depths (logreg)");
  std::string table_config, table_out;
  std::vector<int> h_list;
  table->add_option("--config", table_config, "Experiment config JSON")->required();
  table->add_option("--out", table_out, "Table CSV path");
  table->add_option("--hidden-depths", h_list, "Depths to sweep (default 1 3 5 10)");

  // search
  auto* search = app.add_subcommand("search", "Run one strategy on one task, print the trace");
  std::string s_family, s_strategy, s_model;
  std::uint64_t s_seed = 0;
  int s_dimension = 0, s_n_train = 0;
  GaConfig s_ga;
  search->add_option("--family", s_family, "quadratic | linear | logreg")->required();
  search->add_option("--strategy", s_strategy, "blind | classic-ga | net-d | net-ga | net-1p")
      ->required();
  search->add_option("--seed", s_seed, "Task + search seed");
  search->add_option("--model", s_model, "Trained model (net strategies)");
  search->add_option("--dimension", s_dimension, "Task dimension N");
  search->add_option("--n-train", s_n_train, "Training set size (logreg)");
  search->add_option("--generations", s_ga.generations, "Generations");
  search->add_option("--children", s_ga.children, "Children per generation");
  search->add_option("--survivors", s_ga.survivors, "Survivors per generation");
  search->add_option("--mutation-sigma", s_ga.mutation_sigma, "Mutation sigma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      tc.optimizer = optimizer_from_string(optimizer_str);
      return cmd_train(family_str, operator_str, hidden_depth, seed, out, dimension, n_train, tc,
                       parent_radius);
    }
    if (*bench) return cmd_bench(bench_config, bench_out);
    if (*table) return cmd_table1(table_config, table_out, h_list);
    if (*search) return cmd_search(s_family, s_strategy, s_seed, s_model, s_dimension, s_n_train,
                                   s_ga);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
