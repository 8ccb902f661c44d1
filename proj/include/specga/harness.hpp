#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "specga/search.hpp"
#include "specga/tasks.hpp"
#include "specga/training.hpp"

namespace specga {

inline constexpr const char* kVersion = "0.1.0";

struct EvalConfig {
  int num_tasks = 1000;
  int generations = 100;
};

struct ExperimentConfig {
  Family family = Family::Quadratic;
  int dimension = 5;
  int n_train = 20;  // logreg only
  int hidden_depth = 5;
  std::vector<std::string> strategies;  // blind | classic-ga | net-d | net-ga | net-1p
  GaConfig ga;
  TrainConfig train;
  EvalConfig eval;
  double parent_radius = 1.0;
  std::uint64_t seed = 0;
  std::string output;
  std::map<std::string, std::string> models;  // strategy -> model path; trained when absent
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::string& path);

// Family metric of a solution: quadratic |f(x) - f(x*)|, linear ||Ax - b||,
// logreg held-out recognition rate.
double metric(const TaskInstance& task, std::span<const double> x);
std::string metric_name(Family family);

struct StrategyCurve {
  std::string strategy;
  int evaluations_per_step = 0;
  bool constant = false;
  std::vector<double> mean;
  std::vector<double> std_error;  // sample std / sqrt(num_tasks)
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string metric;
  std::vector<StrategyCurve> curves;
  // Raw per-task traces, kept when num_tasks <= 100: strategy -> num_tasks
  // rows of generations+1 metric values.
  std::map<std::string, std::vector<std::vector<double>>> raw;
  std::string version = kVersion;
  double wall_clock_seconds = 0.0;
  int threads = 1;
};

// Trains (or loads, when configured) the operators the strategy list needs,
// runs every strategy on num_tasks seeded tasks, aggregates mean and
// standard error per generation. Deterministic given the config.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { Csv, Json };

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

// CSV header: strategy,iteration,metric,mean,stderr (RFC 4180, CRLF).
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);

struct RecognitionRow {
  int hidden_depth = 0;
  double netd_training = 0.0;
  double netd_heldout = 0.0;
  double oracle_training = 0.0;
  double oracle_heldout = 0.0;
  double netd_target_mse = 0.0;  // operator held-out regression loss
};

// Trains one direct-map operator per hidden depth on the logistic-regression
// family and reports mean recognition over cfg.eval.num_tasks tasks, next to
// the iterative oracle's recognition on the same tasks.
std::vector<RecognitionRow> table1_sweep(const std::vector<int>& h_list,
                                         const ExperimentConfig& cfg);

void write_table_csv(const std::vector<RecognitionRow>& rows, const std::string& path);

}  // namespace specga
