#include "specga/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "specga/errors.hpp"
#include "specga/json_io.hpp"

namespace specga {

namespace {

const std::vector<std::string> kKnownStrategies = {"blind", "classic-ga", "net-d", "net-ga",
                                                   "net-1p"};

// Fixed ids so per-task streams do not depend on strategy order.
std::uint64_t strategy_id(const std::string& name) {
  for (std::size_t i = 0; i < kKnownStrategies.size(); ++i)
    if (kKnownStrategies[i] == name) return i + 1;
  throw ConfigError("unknown strategy: " + name);
}

std::optional<OperatorKind> operator_kind_for_strategy(const std::string& name) {
  if (name == "net-d") return OperatorKind::NetD;
  if (name == "net-ga") return OperatorKind::NetGa;
  if (name == "net-1p") return OperatorKind::Net1p;
  return std::nullopt;
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

int threads_in_use() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.eval.num_tasks < 1) throw ConfigError("eval.num_tasks must be >= 1");
  if (cfg.eval.generations < 0) throw ConfigError("eval.generations must be >= 0");
  if (cfg.strategies.empty()) throw ConfigError("strategies must be non-empty");
  std::set<std::string> seen;
  for (const auto& s : cfg.strategies) {
    strategy_id(s);
    if (!seen.insert(s).second) throw ConfigError("duplicate strategy: " + s);
  }
  if (cfg.ga.survivors < 2) throw ConfigError("ga.survivors must be >= 2");
  if (cfg.ga.children < 1) throw ConfigError("ga.children must be >= 1");
  if (cfg.ga.mutation_sigma <= 0.0) throw ConfigError("ga.mutation_sigma must be > 0");
  if (cfg.hidden_depth < 1) throw ConfigError("hidden_depth must be >= 1");
  if (cfg.parent_radius <= 0.0) throw ConfigError("parent_radius must be > 0");
  try {
    make_descriptor(cfg.family, cfg.dimension, cfg.n_train);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad dimensions: ") + e.what());
  }
}

struct OperatorSet {
  std::map<std::string, std::shared_ptr<const TrainedOperator>> by_strategy;
};

std::shared_ptr<const TrainedOperator> resolve_operator(const ExperimentConfig& cfg,
                                                        const std::string& strategy) {
  const OperatorKind kind = *operator_kind_for_strategy(strategy);
  const auto it = cfg.models.find(strategy);
  if (it != cfg.models.end()) {
    TrainedOperator op = load_operator(it->second);
    if (op.family != cfg.family || op.dimension != cfg.dimension || op.kind != kind ||
        (cfg.family == Family::LogReg && op.n_train != cfg.n_train))
      throw ModelError("model " + it->second + " does not match the experiment config");
    return std::make_shared<const TrainedOperator>(std::move(op));
  }
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.train.seed, seed_tags::kOperator, strategy_id(strategy),
                        static_cast<std::uint64_t>(cfg.hidden_depth));
  return std::make_shared<const TrainedOperator>(
      train_operator(cfg.family, kind, cfg.dimension, cfg.n_train, cfg.hidden_depth, tc,
                     cfg.parent_radius));
}

SearchTrace run_strategy(const std::string& name, const TaskInstance& task,
                         const OperatorSet& ops, const GaConfig& ga, Rng& rng) {
  if (name == "blind") return blind_search(task, ga.generations, ga.children, rng, metric);
  if (name == "classic-ga") return classic_ga(task, ga, rng, metric);
  const auto& op = ops.by_strategy.at(name);
  if (name == "net-d") return netd_solve(op->net, task, ga.generations, metric);
  if (name == "net-ga") return net_ga(op->net, task, ga, rng, metric);
  return net_1p(op->net, task, ga, rng, metric);
}

}  // namespace

double metric(const TaskInstance& task, std::span<const double> x) {
  switch (task.family()) {
    case Family::Quadratic: {
      const auto& t = task.quadratic();
      const std::vector<double> x_star = quadratic_oracle(t);
      return std::abs(quadratic_fitness(t, x) - quadratic_fitness(t, x_star));
    }
    case Family::Linear:
      return std::sqrt(linear_fitness(task.linear(), x));
    case Family::LogReg:
      return logreg_recognition(task.logreg(), x);
  }
  throw std::invalid_argument("metric: bad family");
}

std::string metric_name(Family family) {
  switch (family) {
    case Family::Quadratic: return "quad_fgap";
    case Family::Linear: return "lin_residual";
    case Family::LogReg: return "recognition";
  }
  throw std::invalid_argument("metric_name: bad family");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"family", "dimension", "n_train", "hidden_depth", "strategies", "ga", "train",
              "eval", "parent_radius", "seed", "output", "models"},
             "config");
  ExperimentConfig cfg;
  try {
    cfg.family = family_from_string(j.at("family").get<std::string>());
    if (j.contains("dimension")) cfg.dimension = j["dimension"].get<int>();
    else if (cfg.family == Family::LogReg) cfg.dimension = 2;
    if (j.contains("n_train")) cfg.n_train = j["n_train"].get<int>();
    if (j.contains("hidden_depth")) cfg.hidden_depth = j["hidden_depth"].get<int>();
    if (j.contains("strategies")) cfg.strategies = j["strategies"].get<std::vector<std::string>>();
    if (j.contains("ga")) {
      const auto& g = j["ga"];
      check_keys(g, {"survivors", "children", "mutation_sigma", "generations"}, "ga");
      if (g.contains("survivors")) cfg.ga.survivors = g["survivors"].get<int>();
      if (g.contains("children")) cfg.ga.children = g["children"].get<int>();
      if (g.contains("mutation_sigma")) cfg.ga.mutation_sigma = g["mutation_sigma"].get<double>();
      if (g.contains("generations")) cfg.ga.generations = g["generations"].get<int>();
    }
    if (j.contains("train")) cfg.train = train_config_from_json(j["train"]);
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      check_keys(e, {"num_tasks", "generations"}, "eval");
      if (e.contains("num_tasks")) cfg.eval.num_tasks = e["num_tasks"].get<int>();
      if (e.contains("generations")) cfg.eval.generations = e["generations"].get<int>();
      else cfg.eval.generations = cfg.ga.generations;
    } else {
      cfg.eval.generations = cfg.ga.generations;
    }
    if (j.contains("parent_radius")) cfg.parent_radius = j["parent_radius"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
    if (j.contains("models"))
      cfg.models = j["models"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["family"] = family_to_string(cfg.family);
  j["dimension"] = cfg.dimension;
  j["n_train"] = cfg.n_train;
  j["hidden_depth"] = cfg.hidden_depth;
  j["strategies"] = cfg.strategies;
  j["ga"] = {{"survivors", cfg.ga.survivors},
             {"children", cfg.ga.children},
             {"mutation_sigma", cfg.ga.mutation_sigma},
             {"generations", cfg.ga.generations}};
  j["train"] = train_config_to_json(cfg.train);
  j["eval"] = {{"num_tasks", cfg.eval.num_tasks}, {"generations", cfg.eval.generations}};
  j["parent_radius"] = cfg.parent_radius;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  j["models"] = cfg.models;
  return j;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  ExperimentConfig cfg = experiment_config_from_json(j);
  validate_config(cfg);
  return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  OperatorSet ops;
  for (const auto& strategy : cfg.strategies)
    if (operator_kind_for_strategy(strategy))
      ops.by_strategy[strategy] = resolve_operator(cfg, strategy);

  GaConfig ga = cfg.ga;
  ga.generations = cfg.eval.generations;

  const int num_tasks = cfg.eval.num_tasks;
  const int points = cfg.eval.generations + 1;
  std::map<std::string, std::vector<std::vector<double>>> raw;
  for (const auto& s : cfg.strategies)
    raw[s].assign(num_tasks, std::vector<double>(points, 0.0));
  std::vector<int> eval_per_step(cfg.strategies.size(), 0);
  std::vector<char> is_constant(cfg.strategies.size(), 0);

  bool failed = false;
  std::string error;
  // Tasks are independent work items; results land in per-task slots so the
  // outcome does not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < num_tasks; ++t) {
    try {
      const TaskInstance task = TaskInstance::sample(
          cfg.family, cfg.dimension, cfg.n_train,
          derive_seed(cfg.seed, seed_tags::kTask, static_cast<std::uint64_t>(t)));
      for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        const std::string& name = cfg.strategies[s];
        Rng rng(derive_seed(cfg.seed, seed_tags::kStrategy, static_cast<std::uint64_t>(t),
                            strategy_id(name)));
        const SearchTrace trace = run_strategy(name, task, ops, ga, rng);
        raw.at(name)[t] = trace.best_error;
        if (t == 0) {
          eval_per_step[s] = trace.evaluations_per_step;
          is_constant[s] = trace.constant ? 1 : 0;
        }
      }
    } catch (const std::exception& ex) {
#pragma omp critical
      {
        failed = true;
        error = ex.what();
      }
    }
  }
  if (failed) throw NumericError("run_experiment: " + error);

  ExperimentReport report;
  report.config = cfg;
  report.metric = metric_name(cfg.family);
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    const std::string& name = cfg.strategies[s];
    StrategyCurve curve;
    curve.strategy = name;
    curve.evaluations_per_step = eval_per_step[s];
    curve.constant = is_constant[s] != 0;
    curve.mean.resize(points);
    curve.std_error.resize(points);
    const auto& rows = raw[name];
    for (int g = 0; g < points; ++g) {
      double mean = 0.0;
      for (int t = 0; t < num_tasks; ++t) mean += rows[t][g];
      mean /= num_tasks;
      double var = 0.0;
      for (int t = 0; t < num_tasks; ++t) {
        const double d = rows[t][g] - mean;
        var += d * d;
      }
      curve.mean[g] = mean;
      curve.std_error[g] =
          num_tasks > 1 ? std::sqrt(var / (num_tasks - 1)) / std::sqrt(num_tasks) : 0.0;
    }
    report.curves.push_back(std::move(curve));
  }
  if (num_tasks <= 100) report.raw = std::move(raw);
  report.threads = threads_in_use();
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["config"] = experiment_config_to_json(report.config);
  j["metric"] = report.metric;
  nlohmann::json curves = nlohmann::json::array();
  for (const StrategyCurve& c : report.curves) {
    curves.push_back({{"strategy", c.strategy},
                      {"evaluations_per_step", c.evaluations_per_step},
                      {"constant", c.constant},
                      {"mean", c.mean},
                      {"std_error", c.std_error}});
  }
  j["curves"] = std::move(curves);
  if (!report.raw.empty()) j["raw"] = report.raw;
  j["metadata"] = {{"version", report.version},
                   {"wall_clock_seconds", report.wall_clock_seconds},
                   {"threads", report.threads}};
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  try {
    report.config = experiment_config_from_json(j.at("config"));
    report.metric = j.at("metric").get<std::string>();
    for (const auto& c : j.at("curves")) {
      StrategyCurve curve;
      curve.strategy = c.at("strategy").get<std::string>();
      curve.evaluations_per_step = c.at("evaluations_per_step").get<int>();
      curve.constant = c.at("constant").get<bool>();
      curve.mean = c.at("mean").get<std::vector<double>>();
      curve.std_error = c.at("std_error").get<std::vector<double>>();
      report.curves.push_back(std::move(curve));
    }
    if (j.contains("raw"))
      report.raw = j["raw"].get<std::map<std::string, std::vector<std::vector<double>>>>();
    const auto& m = j.at("metadata");
    report.version = m.at("version").get<std::string>();
    report.wall_clock_seconds = m.at("wall_clock_seconds").get<double>();
    report.threads = m.at("threads").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
  return report;
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  if (format == ReportFormat::Json) {
    out << report_to_json(report).dump(2) << '\n';
  } else {
    out << "strategy,iteration,metric,mean,stderr\r\n";
    for (const StrategyCurve& c : report.curves)
      for (std::size_t g = 0; g < c.mean.size(); ++g)
        out << c.strategy << ',' << g << ',' << report.metric << ',' << fmt17(c.mean[g]) << ','
            << fmt17(c.std_error[g]) << "\r\n";
  }
  if (!out) throw ConfigError("write failed for " + path);
}

std::vector<RecognitionRow> table1_sweep(const std::vector<int>& h_list,
                                         const ExperimentConfig& cfg) {
  if (cfg.family != Family::LogReg) throw ConfigError("table1 requires family \"logreg\"");
  if (h_list.empty()) throw ConfigError("table1 requires at least one hidden depth");
  validate_config(cfg);

  const int num_tasks = cfg.eval.num_tasks;
  const FamilyDescriptor desc = make_descriptor(cfg.family, cfg.dimension, cfg.n_train);

  // Shared task set plus oracle recognition, reused across depths.
  std::vector<TaskInstance> tasks;
  tasks.reserve(num_tasks);
  for (int t = 0; t < num_tasks; ++t)
    tasks.push_back(TaskInstance::sample(
        cfg.family, cfg.dimension, cfg.n_train,
        derive_seed(cfg.seed, seed_tags::kTask, static_cast<std::uint64_t>(t))));

  // Per-task slots keep the sums independent of scheduling.
  std::vector<double> per_task_train(num_tasks), per_task_heldout(num_tasks);
  bool failed = false;
  std::string error;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < num_tasks; ++t) {
    try {
      const std::vector<double> w = logreg_oracle(tasks[t].logreg());
      per_task_train[t] = logreg_training_recognition(tasks[t].logreg(), w);
      per_task_heldout[t] = logreg_recognition(tasks[t].logreg(), w);
    } catch (const std::exception& ex) {
#pragma omp critical
      {
        failed = true;
        error = ex.what();
      }
    }
  }
  if (failed) throw NumericError("table1: oracle failed: " + error);
  double oracle_train = 0.0, oracle_heldout = 0.0;
  for (int t = 0; t < num_tasks; ++t) {
    oracle_train += per_task_train[t];
    oracle_heldout += per_task_heldout[t];
  }
  oracle_train /= num_tasks;
  oracle_heldout /= num_tasks;

  std::vector<RecognitionRow> rows;
  for (int h : h_list) {
    if (h < 1) throw ConfigError("table1: hidden depth must be >= 1");
    // Saved per-depth models are picked up from config keys "net-d@h<H>".
    TrainedOperator op = [&] {
      const auto it = cfg.models.find("net-d@h" + std::to_string(h));
      if (it != cfg.models.end()) {
        TrainedOperator loaded = load_operator(it->second);
        if (loaded.family != cfg.family || loaded.dimension != cfg.dimension ||
            loaded.n_train != cfg.n_train || loaded.kind != OperatorKind::NetD ||
            loaded.net.hidden_depth() != h)
          throw ModelError("model " + it->second + " does not match table1 depth " +
                           std::to_string(h));
        return loaded;
      }
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.train.seed, seed_tags::kOperator, strategy_id("net-d"),
                            static_cast<std::uint64_t>(h));
      return train_operator(cfg.family, OperatorKind::NetD, cfg.dimension, cfg.n_train, h, tc,
                            cfg.parent_radius);
    }();

    Matrix inputs(num_tasks, desc.theta_dim);
    for (int t = 0; t < num_tasks; ++t) {
      const std::vector<double> theta = encode_theta(tasks[t]);
      std::copy(theta.begin(), theta.end(), inputs.row(t));
    }
    const Matrix out = op.net.forward_batch(inputs);

    RecognitionRow row;
    row.hidden_depth = h;
    row.netd_target_mse = op.final_heldout_loss;
    for (int t = 0; t < num_tasks; ++t) {
      std::vector<double> w(out.row(t), out.row(t) + desc.solution_dim);
      desc.clip(w);
      row.netd_training += logreg_training_recognition(tasks[t].logreg(), w);
      row.netd_heldout += logreg_recognition(tasks[t].logreg(), w);
    }
    row.netd_training /= num_tasks;
    row.netd_heldout /= num_tasks;
    row.oracle_training = oracle_train;
    row.oracle_heldout = oracle_heldout;
    rows.push_back(row);
  }
  return rows;
}

void write_table_csv(const std::vector<RecognitionRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << "hidden_depth,netd_training,netd_heldout,oracle_training,oracle_heldout,netd_target_mse"
         "\r\n";
  for (const RecognitionRow& r : rows)
    out << r.hidden_depth << ',' << fmt17(r.netd_training) << ',' << fmt17(r.netd_heldout) << ','
        << fmt17(r.oracle_training) << ',' << fmt17(r.oracle_heldout) << ','
        << fmt17(r.netd_target_mse) << "\r\n";
  if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace specga
