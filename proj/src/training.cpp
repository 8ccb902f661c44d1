#include "specga/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "specga/errors.hpp"
#include "specga/json_io.hpp"

namespace specga {

namespace {

void check_train_config(const TrainConfig& cfg) {
  if (cfg.steps < 1) throw ConfigError("train: steps must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (cfg.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
}

void default_dims(Family family, int& dimension, int& n_train) {
  dimension = family == Family::LogReg ? 2 : 5;
  n_train = family == Family::LogReg ? 20 : 0;
}

// One training example: input row per operator kind, target = oracle(task).
void build_example(const TaskInstance& task, OperatorKind kind, double radius, Rng& rng,
                   double* input_row, double* target_row) {
  const FamilyDescriptor& desc = task.descriptor();
  const std::vector<double> x_star = task.oracle();
  const std::vector<double> theta = encode_theta(task);
  double* p = input_row;
  if (kind != OperatorKind::NetD) {
    const std::vector<double> p1 = sample_parent(x_star, radius, desc, rng);
    p = std::copy(p1.begin(), p1.end(), p);
    if (kind == OperatorKind::NetGa) {
      const std::vector<double> p2 = sample_parent(x_star, radius, desc, rng);
      p = std::copy(p2.begin(), p2.end(), p);
    }
  }
  std::copy(theta.begin(), theta.end(), p);
  std::copy(x_star.begin(), x_star.end(), target_row);
}

}  // namespace

std::string operator_kind_to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::NetD: return "net-d";
    case OperatorKind::NetGa: return "net-ga";
    case OperatorKind::Net1p: return "net-1p";
  }
  throw std::invalid_argument("operator_kind_to_string: bad kind");
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "net-d") return OperatorKind::NetD;
  if (s == "net-ga") return OperatorKind::NetGa;
  if (s == "net-1p") return OperatorKind::Net1p;
  throw ConfigError("unknown operator kind: " + s);
}

int operator_input_dim(OperatorKind kind, const FamilyDescriptor& desc) {
  switch (kind) {
    case OperatorKind::NetD: return desc.theta_dim;
    case OperatorKind::NetGa: return 2 * desc.solution_dim + desc.theta_dim;
    case OperatorKind::Net1p: return desc.solution_dim + desc.theta_dim;
  }
  throw std::invalid_argument("operator_input_dim: bad kind");
}

std::vector<double> parent_offset(double radius, int dim, Rng& rng) {
  if (radius <= 0.0) throw std::invalid_argument("parent_offset: radius must be > 0");
  std::vector<double> u(dim);
  for (double& v : u) v = rng.uniform(-radius, radius);
  return u;
}

std::vector<double> sample_parent(std::span<const double> x_star, double radius,
                                  const FamilyDescriptor& desc, Rng& rng) {
  const std::vector<double> u = parent_offset(radius, static_cast<int>(x_star.size()), rng);
  std::vector<double> p(x_star.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = desc.clip(x_star[i] + u[i]);
  return p;
}

TrainedOperator train_operator(Family family, OperatorKind kind, int dimension, int n_train,
                               int hidden_depth, const TrainConfig& cfg, double parent_radius) {
  check_train_config(cfg);
  const FamilyDescriptor desc = make_descriptor(family, dimension, n_train);
  const int in_dim = operator_input_dim(kind, desc);

  TrainedOperator op{
      Mlp(in_dim, hidden_depth, desc.solution_dim, Activation::Relu,
          derive_seed(cfg.seed, seed_tags::kNetInit)),
      family,
      kind,
      dimension,
      n_train,
      parent_radius,
      cfg,
      0.0};

  const int batch = cfg.batch_size;
  Matrix inputs(batch, in_dim);
  Matrix targets(batch, desc.solution_dim);
  Grads grads;
  OptimizerState state;

  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    bool failed = false;
    std::string error;
    // Fresh tasks each batch; element streams are indexed by (seed, step, e)
    // so assembly order does not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
    for (int e = 0; e < batch; ++e) {
      try {
        Rng rng(derive_seed(cfg.seed, seed_tags::kTrainElem, static_cast<std::uint64_t>(step),
                            static_cast<std::uint64_t>(e)));
        const TaskInstance task = TaskInstance::sample(family, dimension, n_train, rng);
        build_example(task, kind, parent_radius, rng, inputs.row(e), targets.row(e));
      } catch (const std::exception& ex) {
#pragma omp critical
        {
          failed = true;
          error = ex.what();
        }
      }
    }
    if (failed) throw NumericError("train: batch assembly failed: " + error);
    op.net.loss_grad(inputs, targets, grads);
    optimizer_step(op.net, grads, state, cfg);
  }

  op.final_heldout_loss = eval_operator(op, 1000, derive_seed(cfg.seed, seed_tags::kHeldout));
  return op;
}

TrainedOperator train_net_d(Family family, int hidden_depth, const TrainConfig& cfg) {
  int dimension, n_train;
  default_dims(family, dimension, n_train);
  return train_operator(family, OperatorKind::NetD, dimension, n_train, hidden_depth, cfg);
}

TrainedOperator train_net_ga(Family family, int hidden_depth, const TrainConfig& cfg,
                             double parent_radius) {
  int dimension, n_train;
  default_dims(family, dimension, n_train);
  return train_operator(family, OperatorKind::NetGa, dimension, n_train, hidden_depth, cfg,
                        parent_radius);
}

TrainedOperator train_net_1p(Family family, int hidden_depth, const TrainConfig& cfg,
                             double parent_radius) {
  int dimension, n_train;
  default_dims(family, dimension, n_train);
  return train_operator(family, OperatorKind::Net1p, dimension, n_train, hidden_depth, cfg,
                        parent_radius);
}

double eval_operator(const TrainedOperator& op, int n_tasks, std::uint64_t seed) {
  if (n_tasks < 1) throw std::invalid_argument("eval_operator: n_tasks must be >= 1");
  const FamilyDescriptor desc = make_descriptor(op.family, op.dimension, op.n_train);
  const int in_dim = operator_input_dim(op.kind, desc);
  if (op.net.input_dim() != in_dim || op.net.output_dim() != desc.solution_dim)
    throw ModelError("eval_operator: net dims do not match operator description");

  constexpr int kChunk = 128;
  double total = 0.0;
  for (int start = 0; start < n_tasks; start += kChunk) {
    const int count = std::min(kChunk, n_tasks - start);
    Matrix inputs(count, in_dim);
    Matrix targets(count, desc.solution_dim);
    bool failed = false;
    std::string error;
#pragma omp parallel for schedule(dynamic)
    for (int e = 0; e < count; ++e) {
      try {
        Rng rng(derive_seed(seed, seed_tags::kHeldout, static_cast<std::uint64_t>(start + e)));
        const TaskInstance task = TaskInstance::sample(op.family, op.dimension, op.n_train, rng);
        build_example(task, op.kind, op.parent_radius, rng, inputs.row(e), targets.row(e));
      } catch (const std::exception& ex) {
#pragma omp critical
        {
          failed = true;
          error = ex.what();
        }
      }
    }
    if (failed) throw NumericError("eval_operator: task assembly failed: " + error);
    const Matrix out = op.net.forward_batch(inputs);
    for (int e = 0; e < count; ++e) {
      const double* y = out.row(e);
      const double* t = targets.row(e);
      for (int j = 0; j < desc.solution_dim; ++j) {
        const double d = y[j] - t[j];
        total += d * d;
      }
    }
  }
  return total / n_tasks;
}

std::string manifest_path_for(const std::string& model_path) {
  const std::string suffix = ".json";
  if (model_path.size() > suffix.size() &&
      model_path.compare(model_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return model_path.substr(0, model_path.size() - suffix.size()) + ".manifest.json";
  return model_path + ".manifest.json";
}

void save_operator(const TrainedOperator& op, const std::string& model_path) {
  op.net.save(model_path);
  nlohmann::json j;
  j["operator"] = operator_kind_to_string(op.kind);
  j["family"] = family_to_string(op.family);
  j["dimension"] = op.dimension;
  j["n_train"] = op.n_train;
  j["parent_radius"] = op.parent_radius;
  j["train_config"] = train_config_to_json(op.train_config);
  j["final_heldout_loss"] = op.final_heldout_loss;
  std::ofstream out(manifest_path_for(model_path));
  if (!out) throw ModelError("save_operator: cannot write " + manifest_path_for(model_path));
  out << j.dump(2) << '\n';
}

TrainedOperator load_operator(const std::string& model_path) {
  Mlp net = Mlp::load(model_path);
  const std::string mpath = manifest_path_for(model_path);
  std::ifstream in(mpath);
  if (!in) throw ModelError("load_operator: missing manifest " + mpath);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("load_operator: malformed manifest " + mpath + ": " + e.what());
  }
  TrainedOperator op{std::move(net), Family::Quadratic, OperatorKind::NetD, 0, 0, 1.0,
                     TrainConfig{}, 0.0};
  try {
    op.kind = operator_kind_from_string(j.at("operator").get<std::string>());
    op.family = family_from_string(j.at("family").get<std::string>());
    op.dimension = j.at("dimension").get<int>();
    op.n_train = j.value("n_train", 0);
    op.parent_radius = j.at("parent_radius").get<double>();
    op.train_config = train_config_from_json(j.at("train_config"));
    op.final_heldout_loss = j.at("final_heldout_loss").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("load_operator: invalid manifest " + mpath + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ModelError("load_operator: invalid manifest " + mpath + ": " + e.what());
  }
  const FamilyDescriptor desc = make_descriptor(op.family, op.dimension, op.n_train);
  if (op.net.input_dim() != operator_input_dim(op.kind, desc) ||
      op.net.output_dim() != desc.solution_dim)
    throw ModelError("load_operator: model dims do not match manifest for " + model_path);
  return op;
}

}  // namespace specga
