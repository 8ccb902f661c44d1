#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "specga/errors.hpp"
#include "specga/training.hpp"

using namespace specga;

namespace {

TrainConfig tiny_config(std::uint64_t seed, std::int64_t steps = 400) {
  TrainConfig cfg;
  cfg.steps = steps;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-3;
  cfg.seed = seed;
  return cfg;
}

TrainedOperator untrained_like(const TrainedOperator& op) {
  TrainedOperator fresh = op;
  fresh.net = Mlp(op.net.input_dim(), op.net.hidden_depth(), op.net.output_dim(),
                  op.net.activation(), derive_seed(op.train_config.seed, seed_tags::kNetInit));
  return fresh;
}

}  // namespace

TEST_CASE("operator input dims follow the family contract") {
  const FamilyDescriptor quad = make_descriptor(Family::Quadratic, 5);
  CHECK(operator_input_dim(OperatorKind::NetD, quad) == 10);
  CHECK(operator_input_dim(OperatorKind::NetGa, quad) == 20);
  CHECK(operator_input_dim(OperatorKind::Net1p, quad) == 15);

  const FamilyDescriptor lr = make_descriptor(Family::LogReg, 2, 20);
  CHECK(operator_input_dim(OperatorKind::NetD, lr) == 60);
  CHECK(operator_input_dim(OperatorKind::NetGa, lr) == 66);
}

TEST_CASE("parent offsets respect the radius before clipping") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> u = parent_offset(1.0, 5, rng);
    for (double v : u) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
  const FamilyDescriptor desc = make_descriptor(Family::Quadratic, 2);
  const std::vector<double> near_edge = {4.8, -4.8};
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> p = sample_parent(near_edge, 1.0, desc, rng);
    for (double v : p) {
      CHECK(v >= -5.0);
      CHECK(v <= 5.0);
    }
  }
  CHECK_THROWS_AS(parent_offset(0.0, 3, rng), std::invalid_argument);
}

TEST_CASE("training beats the untrained net and is reproducible") {
  const TrainConfig cfg = tiny_config(42);
  const TrainedOperator op =
      train_operator(Family::Quadratic, OperatorKind::NetD, 2, 0, 1, cfg);
  const double untrained = eval_operator(untrained_like(op), 200, 99);
  const double trained = eval_operator(op, 200, 99);
  CHECK(trained < 0.5 * untrained);
  CHECK(op.final_heldout_loss == eval_operator(op, 1000, derive_seed(cfg.seed, seed_tags::kHeldout)));

  const TrainedOperator again =
      train_operator(Family::Quadratic, OperatorKind::NetD, 2, 0, 1, cfg);
  CHECK(op.net == again.net);
  CHECK(op.final_heldout_loss == again.final_heldout_loss);
}

TEST_CASE("net-ga training consumes parents and still regresses to the oracle") {
  const TrainConfig cfg = tiny_config(7, 600);
  const TrainedOperator op =
      train_operator(Family::Quadratic, OperatorKind::NetGa, 2, 0, 1, cfg, 1.0);
  const double untrained = eval_operator(untrained_like(op), 200, 5);
  CHECK(eval_operator(op, 200, 5) < 0.5 * untrained);

  const TrainedOperator one_parent =
      train_operator(Family::Quadratic, OperatorKind::Net1p, 2, 0, 1, cfg, 1.0);
  const double untrained_1p = eval_operator(untrained_like(one_parent), 200, 5);
  CHECK(eval_operator(one_parent, 200, 5) < 0.5 * untrained_1p);
}

TEST_CASE("eval_operator is a deterministic scalar") {
  const TrainConfig cfg = tiny_config(3, 50);
  const TrainedOperator op = train_operator(Family::Linear, OperatorKind::NetD, 2, 0, 1, cfg);
  const double one = eval_operator(op, 1, 123);
  CHECK(one == eval_operator(op, 1, 123));
  CHECK(eval_operator(op, 10, 123) == eval_operator(op, 10, 123));
  CHECK(one != eval_operator(op, 1, 124));
}

TEST_CASE("operators round-trip through model plus manifest") {
  const TrainConfig cfg = tiny_config(11, 60);
  const TrainedOperator op =
      train_operator(Family::LogReg, OperatorKind::NetD, 2, 20, 1, cfg);
  const std::string path = "test_operator.json";
  save_operator(op, path);
  CHECK(manifest_path_for(path) == "test_operator.manifest.json");

  const TrainedOperator loaded = load_operator(path);
  CHECK(loaded.net == op.net);
  CHECK(loaded.family == op.family);
  CHECK(loaded.kind == op.kind);
  CHECK(loaded.dimension == op.dimension);
  CHECK(loaded.n_train == op.n_train);
  CHECK(loaded.parent_radius == op.parent_radius);
  CHECK(loaded.final_heldout_loss == op.final_heldout_loss);
  CHECK(loaded.train_config.steps == cfg.steps);

  // a net-ga manifest over a net-d model is dimensionally inconsistent
  TrainedOperator wrong = op;
  wrong.kind = OperatorKind::NetGa;
  const std::string bad = "test_operator_bad.json";
  wrong.net.save(bad);
  save_operator(wrong, bad);
  CHECK_THROWS_AS(load_operator(bad), ModelError);

  CHECK_THROWS_AS(load_operator("missing_model.json"), ModelError);
  std::remove(path.c_str());
  std::remove(manifest_path_for(path).c_str());
  std::remove(bad.c_str());
  std::remove(manifest_path_for(bad).c_str());
}

TEST_CASE("train rejects invalid configs") {
  TrainConfig cfg = tiny_config(1);
  cfg.steps = 0;
  CHECK_THROWS_AS(train_operator(Family::Quadratic, OperatorKind::NetD, 2, 0, 1, cfg),
                  ConfigError);
  cfg = tiny_config(1);
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train_operator(Family::Quadratic, OperatorKind::NetD, 2, 0, 1, cfg),
                  ConfigError);
}
