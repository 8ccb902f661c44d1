#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specga/mlp.hpp"
#include "specga/rng.hpp"
#include "specga/tasks.hpp"

namespace specga {

enum class OperatorKind { NetD, NetGa, Net1p };

std::string operator_kind_to_string(OperatorKind k);
OperatorKind operator_kind_from_string(const std::string& s);

struct TrainedOperator {
  Mlp net;
  Family family = Family::Quadratic;
  OperatorKind kind = OperatorKind::NetD;
  int dimension = 0;
  int n_train = 0;  // logreg only
  double parent_radius = 1.0;
  TrainConfig train_config;
  double final_heldout_loss = 0.0;
};

// Net input width for a given operator kind on a given family.
int operator_input_dim(OperatorKind kind, const FamilyDescriptor& desc);

// Per-coordinate uniform offset in [-radius, radius].
std::vector<double> parent_offset(double radius, int dim, Rng& rng);
// clip(x_star + parent_offset) into the family search box.
std::vector<double> sample_parent(std::span<const double> x_star, double radius,
                                  const FamilyDescriptor& desc, Rng& rng);

// Regression training on freshly sampled tasks with oracle targets; batches
// are assembled in parallel from per-element derived seeds, so the result is
// identical for any thread count. final_heldout_loss is the mean squared
// target error over 1000 fresh tasks.
TrainedOperator train_operator(Family family, OperatorKind kind, int dimension, int n_train,
                               int hidden_depth, const TrainConfig& cfg,
                               double parent_radius = 1.0);

// Family-default dimensions: quadratic/linear N = 5; logreg N = 2 with
// n_train = 20.
TrainedOperator train_net_d(Family family, int hidden_depth, const TrainConfig& cfg);
TrainedOperator train_net_ga(Family family, int hidden_depth, const TrainConfig& cfg,
                             double parent_radius = 1.0);
TrainedOperator train_net_1p(Family family, int hidden_depth, const TrainConfig& cfg,
                             double parent_radius = 1.0);

// Mean squared target error over n_tasks fresh tasks, inputs built exactly
// as in training. Deterministic in the seed.
double eval_operator(const TrainedOperator& op, int n_tasks, std::uint64_t seed);

// Model file plus sidecar manifest ("<path minus .json>.manifest.json").
std::string manifest_path_for(const std::string& model_path);
void save_operator(const TrainedOperator& op, const std::string& model_path);
TrainedOperator load_operator(const std::string& model_path);

}  // namespace specga
