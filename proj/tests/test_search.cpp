#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "specga/harness.hpp"
#include "specga/search.hpp"

using namespace specga;

namespace {

TaskInstance quad_task(std::uint64_t seed, int n = 5) {
  return TaskInstance::sample(Family::Quadratic, n, 0, seed);
}

// Net that forwards selected input coordinates to the output: hidden unit i
// computes input[pick[i]] + 100 (safely in the linear region of the
// rectifier), the output subtracts the 100 again.
Mlp passthrough_net(int in_dim, const std::vector<int>& pick) {
  const int out = static_cast<int>(pick.size());
  Mlp::Layer hidden{Matrix(100, in_dim), std::vector<double>(100, 0.0)};
  for (int i = 0; i < out; ++i) {
    hidden.w(i, pick[i]) = 1.0;
    hidden.b[i] = 100.0;
  }
  Mlp::Layer last{Matrix(out, 100), std::vector<double>(out, -100.0)};
  for (int i = 0; i < out; ++i) last.w(i, i) = 1.0;
  return Mlp::from_parts({in_dim, 100, out}, Activation::Relu, {hidden, last});
}

}  // namespace

TEST_CASE("init_population fills the box with evaluated candidates") {
  const TaskInstance task = quad_task(1);
  Rng rng(2);
  const Population pop = init_population(task, 10, rng);
  REQUIRE(pop.size() == 10);
  for (const Candidate& c : pop) {
    REQUIRE(c.x.size() == 5);
    for (double v : c.x) {
      CHECK(v >= -5.0);
      CHECK(v <= 5.0);
    }
    CHECK(c.fitness == task.fitness(c.x));  // cached fitness coherence
  }
  Rng r1(3), r2(3);
  const Population p1 = init_population(task, 6, r1);
  const Population p2 = init_population(task, 6, r2);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].x == p2[i].x);
}

TEST_CASE("blind search is monotone and nails 1-d quadratics eventually") {
  const TaskInstance task = quad_task(4);
  Rng rng(5);
  const SearchTrace t0 = blind_search(task, 0, 20, rng, metric);
  CHECK(t0.best_fitness.size() == 1);
  CHECK(t0.evaluations_per_step == 20);

  for (int run = 0; run < 200; ++run) {
    Rng r(1000 + run);
    const SearchTrace t = blind_search(task, 30, 5, r, metric);
    REQUIRE(t.best_fitness.size() == 31);
    for (std::size_t g = 1; g < t.best_fitness.size(); ++g)
      CHECK(t.best_fitness[g] <= t.best_fitness[g - 1]);
  }

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TaskInstance one = TaskInstance::sample(Family::Quadratic, 1, 0, 40 + seed);
    Rng r(50 + seed);
    const SearchTrace t = blind_search(one, 10000, 1, r, metric);
    CHECK(t.best_error.back() < 0.01);
  }
}

TEST_CASE("mutate adds clipped gaussian noise") {
  const FamilyDescriptor desc = make_descriptor(Family::Quadratic, 3);
  Rng rng(6);
  const std::vector<double> x = {1.0, -2.0, 0.5};
  const std::vector<double> tiny = mutate(x, 1e-12, desc, rng);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(tiny[i] - x[i]) < 1e-10);

  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  const std::vector<double> origin = {0.0};
  const FamilyDescriptor d1 = make_descriptor(Family::Quadratic, 1);
  for (int i = 0; i < n; ++i) {
    const double v = mutate(origin, 0.1, d1, rng)[0];
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  CHECK(std::abs(sd - 0.1) < 0.005);

  const std::vector<double> edge = {5.0, -5.0, 4.9};
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> m = mutate(edge, 2.0, desc, rng);
    for (double v : m) {
      CHECK(v >= -5.0);
      CHECK(v <= 5.0);
    }
  }
  CHECK_THROWS_AS(mutate(x, 0.0, desc, rng), std::invalid_argument);
}

TEST_CASE("uniform crossover copies coordinates from either parent") {
  Rng rng(7);
  const std::vector<double> x1 = {1, 2, 3, 4};
  CHECK(uniform_crossover(x1, x1, rng) == x1);

  const std::vector<double> x2 = {-1, -2, -3, -4};
  int from_first = 0;
  const int trials = 10000;
  for (int s = 0; s < trials; ++s) {
    const std::vector<double> child = uniform_crossover(x1, x2, rng);
    for (int i = 0; i < 4; ++i) {
      const bool first = child[i] == x1[i];
      CHECK((first || child[i] == x2[i]));
      if (first) ++from_first;
    }
  }
  const double frac = static_cast<double>(from_first) / (4.0 * trials);
  CHECK(std::abs(frac - 0.5) < 0.02);

  CHECK_THROWS_AS(uniform_crossover(x1, std::vector<double>{1.0}, rng), std::invalid_argument);
}

TEST_CASE("ga_step keeps the elite and sizes the next population") {
  const TaskInstance task = quad_task(8);
  Rng rng(9);
  Population pop = init_population(task, 20, rng);
  GaConfig cfg;

  // copy-first-parent children keep the best fitness constant
  const ChildFn copy_first = [](std::span<const double> x1, std::span<const double>, Rng&) {
    return std::vector<double>(x1.begin(), x1.end());
  };
  double best = pop[0].fitness;
  for (const Candidate& c : pop) best = std::min(best, c.fitness);
  for (int g = 0; g < 10; ++g) {
    pop = ga_step(pop, task, cfg, copy_first, rng);
    CHECK(pop.size() == 30u);
    double now = pop[0].fitness;
    for (const Candidate& c : pop) now = std::min(now, c.fitness);
    CHECK(now == best);
  }

  // arbitrary children can never raise the best fitness
  const FamilyDescriptor& desc = task.descriptor();
  const ChildFn noisy = [&desc](std::span<const double> x1, std::span<const double> x2, Rng& r) {
    return mutate(uniform_crossover(x1, x2, r), 0.5, desc, r);
  };
  for (int g = 0; g < 50; ++g) {
    double before = pop[0].fitness;
    for (const Candidate& c : pop) before = std::min(before, c.fitness);
    pop = ga_step(pop, task, cfg, noisy, rng);
    double after = pop[0].fitness;
    for (const Candidate& c : pop) after = std::min(after, c.fitness);
    CHECK(after <= before);
  }

  Population small = init_population(task, 5, rng);
  CHECK_THROWS_AS(ga_step(small, task, cfg, copy_first, rng), std::invalid_argument);

  // cached fitness stays coherent with a recomputation
  for (const Candidate& c : pop) CHECK(c.fitness == task.fitness(c.x));
}

TEST_CASE("classic_ga traces are monotone, deterministic, and box-closed") {
  const TaskInstance task = quad_task(10);
  GaConfig cfg;
  cfg.generations = 40;

  Rng r1(11), r2(11);
  const SearchTrace a = classic_ga(task, cfg, r1, metric);
  const SearchTrace b = classic_ga(task, cfg, r2, metric);
  CHECK(a.best_fitness == b.best_fitness);
  CHECK(a.best_error == b.best_error);
  REQUIRE(a.best_fitness.size() == 41);
  CHECK(a.evaluations_per_step == 20);
  for (std::size_t g = 1; g < a.best_fitness.size(); ++g) {
    CHECK(a.best_fitness[g] <= a.best_fitness[g - 1]);
    for (double v : a.best_x[g]) {
      CHECK(v >= -5.0);
      CHECK(v <= 5.0);
    }
  }

  GaConfig zero;
  zero.generations = 0;
  Rng r3(12);
  CHECK(classic_ga(task, zero, r3, metric).best_fitness.size() == 1);
}

TEST_CASE("netd_solve emits a constant in-box trace") {
  const TaskInstance task = quad_task(13);
  const FamilyDescriptor& desc = task.descriptor();
  // all-zero weights with a huge output bias: output clips to the box edge
  std::vector<Mlp::Layer> layers;
  layers.push_back({Matrix(100, desc.theta_dim), std::vector<double>(100, 0.0)});
  layers.push_back({Matrix(desc.solution_dim, 100), std::vector<double>(desc.solution_dim, 50.0)});
  const Mlp net = Mlp::from_parts({desc.theta_dim, 100, desc.solution_dim}, Activation::Relu,
                                  std::move(layers));
  const SearchTrace t = netd_solve(net, task, 25, metric);
  REQUIRE(t.best_fitness.size() == 26);
  CHECK(t.constant);
  CHECK(t.evaluations_per_step == 0);
  for (std::size_t g = 0; g < t.best_fitness.size(); ++g) {
    CHECK(t.best_fitness[g] == t.best_fitness[0]);
    CHECK(t.best_error[g] == t.best_error[0]);
  }
  for (double v : t.best_x[0]) CHECK(v == 5.0);

  const Mlp wrong(3, 1, 2, Activation::Relu, 0);
  CHECK_THROWS_AS(netd_solve(wrong, task, 5, metric), std::invalid_argument);
}

TEST_CASE("operator input layouts are pinned") {
  const std::vector<double> x1 = {1.5, -2.5};
  const std::vector<double> x2 = {3.25, 0.125};
  const std::vector<double> theta = {9.0, 8.0, 7.0};
  CHECK(assemble_netga_input(x1, x2, theta) ==
        std::vector<double>{1.5, -2.5, 3.25, 0.125, 9.0, 8.0, 7.0});
  CHECK(assemble_net1p_input(x1, theta) == std::vector<double>{1.5, -2.5, 9.0, 8.0, 7.0});
}

TEST_CASE("netga_child assembles [x1, x2, theta] and clips to the box") {
  const TaskInstance task = quad_task(14, 2);
  const FamilyDescriptor& desc = task.descriptor();
  const std::vector<double> theta = encode_theta(task);
  // picks: out0 = x1[0], out1 = x2[1], verified through the net
  const Mlp net = passthrough_net(2 + 2 + static_cast<int>(theta.size()), {0, 3});
  Rng rng(15);
  const std::vector<double> x1 = {1.25, -0.5};
  const std::vector<double> x2 = {2.0, -3.75};
  const std::vector<double> child = netga_child(net, x1, x2, theta, 1e-13, desc, rng);
  REQUIRE(child.size() == 2);
  CHECK(child[0] == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(child[1] == doctest::Approx(-3.75).epsilon(1e-9));

  // theta positions flow through as well
  const Mlp net_theta = passthrough_net(2 + 2 + static_cast<int>(theta.size()), {4, 5});
  Rng rng2(16);
  const std::vector<double> child2 = netga_child(net_theta, x1, x2, theta, 1e-13, desc, rng2);
  CHECK(child2[0] == doctest::Approx(desc.clip(theta[0])).epsilon(1e-9));
  CHECK(child2[1] == doctest::Approx(desc.clip(theta[1])).epsilon(1e-9));
}

TEST_CASE("net_ga equals ga_step composed with netga_child, and is monotone") {
  const TaskInstance task = quad_task(17);
  const FamilyDescriptor& desc = task.descriptor();
  const std::vector<double> theta = encode_theta(task);
  const int in_dim = 2 * desc.solution_dim + desc.theta_dim;
  const Mlp net(in_dim, 1, desc.solution_dim, Activation::Relu, 18);

  GaConfig cfg;
  cfg.generations = 15;

  Rng r1(19);
  const SearchTrace batched = net_ga(net, task, cfg, r1, metric);

  // same loop built from the public pieces
  Rng r2(19);
  Population pop = init_population(task, cfg.children, r2);
  const ChildFn child = [&](std::span<const double> a, std::span<const double> b, Rng& r) {
    return netga_child(net, a, b, theta, cfg.mutation_sigma, desc, r);
  };
  std::vector<double> best_fitness;
  auto best_of = [](const Population& p) {
    double best = p[0].fitness;
    for (const Candidate& c : p) best = std::min(best, c.fitness);
    return best;
  };
  best_fitness.push_back(best_of(pop));
  for (int g = 0; g < cfg.generations; ++g) {
    pop = ga_step(pop, task, cfg, child, r2);
    best_fitness.push_back(best_of(pop));
  }
  CHECK(batched.best_fitness == best_fitness);

  for (std::size_t g = 1; g < batched.best_fitness.size(); ++g)
    CHECK(batched.best_fitness[g] <= batched.best_fitness[g - 1]);

  const Mlp wrong(in_dim + 1, 1, desc.solution_dim, Activation::Relu, 0);
  Rng r3(20);
  CHECK_THROWS_AS(net_ga(wrong, task, cfg, r3, metric), std::invalid_argument);
}

TEST_CASE("net_1p runs, stays monotone, and replays deterministically") {
  const TaskInstance task = quad_task(21);
  const FamilyDescriptor& desc = task.descriptor();
  const int in_dim = desc.solution_dim + desc.theta_dim;
  const Mlp net(in_dim, 1, desc.solution_dim, Activation::Relu, 22);

  GaConfig cfg;
  cfg.generations = 15;
  Rng r1(23), r2(23);
  const SearchTrace a = net_1p(net, task, cfg, r1, metric);
  const SearchTrace b = net_1p(net, task, cfg, r2, metric);
  CHECK(a.best_fitness == b.best_fitness);
  CHECK(a.strategy == "net-1p");
  for (std::size_t g = 1; g < a.best_fitness.size(); ++g)
    CHECK(a.best_fitness[g] <= a.best_fitness[g - 1]);
  for (const auto& x : a.best_x)
    for (double v : x) {
      CHECK(v >= desc.box_lo);
      CHECK(v <= desc.box_hi);
    }
}
