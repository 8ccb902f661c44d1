#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specga/mlp.hpp"
#include "specga/rng.hpp"
#include "specga/tasks.hpp"

namespace specga {

struct Candidate {
  std::vector<double> x;
  double fitness = 0.0;
};

using Population = std::vector<Candidate>;

struct GaConfig {
  int survivors = 10;
  int children = 20;
  double mutation_sigma = 0.1;
  int generations = 100;
};

// Per-generation best series; entry 0 describes the initial population.
struct SearchTrace {
  std::string strategy;
  std::vector<double> best_fitness;
  std::vector<double> best_error;  // family metric of the best candidate
  std::vector<std::vector<double>> best_x;
  int evaluations_per_step = 0;
  bool constant = false;
};

// Family metric of a solution, supplied by the harness.
using MetricFn = std::function<double(const TaskInstance&, std::span<const double>)>;

// One child from an ordered pair of parents.
using ChildFn =
    std::function<std::vector<double>(std::span<const double>, std::span<const double>, Rng&)>;

Population init_population(const TaskInstance& task, int size, Rng& rng);

// Fresh uniform batch each step, best-so-far tracking. Trace has
// iterations + 1 entries.
SearchTrace blind_search(const TaskInstance& task, int iterations, int batch, Rng& rng,
                         const MetricFn& metric);

// x + N(0, sigma^2) per coordinate, clipped to the search box.
std::vector<double> mutate(std::span<const double> x, double sigma, const FamilyDescriptor& desc,
                           Rng& rng);

// Each coordinate copied from either parent with probability 1/2.
std::vector<double> uniform_crossover(std::span<const double> x1, std::span<const double> x2,
                                      Rng& rng);

// Truncation-select the best cfg.survivors (stable ascending by fitness),
// breed cfg.children from uniformly random ordered pairs of distinct
// survivors, return survivors + evaluated children.
Population ga_step(const Population& pop, const TaskInstance& task, const GaConfig& cfg,
                   const ChildFn& child_fn, Rng& rng);

SearchTrace classic_ga(const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                       const MetricFn& metric);

// Direct theta -> solution map; no search, constant trace of the requested
// number of generations.
SearchTrace netd_solve(const Mlp& net, const TaskInstance& task, int generations,
                       const MetricFn& metric);

// Input layouts shared by search and operator training.
std::vector<double> assemble_netga_input(std::span<const double> x1, std::span<const double> x2,
                                         std::span<const double> theta);
std::vector<double> assemble_net1p_input(std::span<const double> x1,
                                         std::span<const double> theta);

// net(mutate(x1) || mutate(x2) || theta), clipped to the search box.
std::vector<double> netga_child(const Mlp& net, std::span<const double> x1,
                                std::span<const double> x2, std::span<const double> theta,
                                double sigma, const FamilyDescriptor& desc, Rng& rng);

SearchTrace net_ga(const Mlp& net, const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                   const MetricFn& metric);
// One-parent variant: net(mutate(x1) || theta).
SearchTrace net_1p(const Mlp& net, const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                   const MetricFn& metric);

}  // namespace specga
