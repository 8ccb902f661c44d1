#include "specga/search.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace specga {

namespace {

std::size_t best_index(const Population& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].fitness < pop[best].fitness) best = i;
  return best;
}

void record(SearchTrace& trace, const TaskInstance& task, const MetricFn& metric,
            const Candidate& best) {
  trace.best_fitness.push_back(best.fitness);
  trace.best_error.push_back(metric ? metric(task, best.x) : best.fitness);
  trace.best_x.push_back(best.x);
}

void check_ga_config(const GaConfig& cfg) {
  if (cfg.survivors < 2) throw std::invalid_argument("GaConfig: survivors must be >= 2");
  if (cfg.children < 1) throw std::invalid_argument("GaConfig: children must be >= 1");
  if (cfg.mutation_sigma <= 0.0)
    throw std::invalid_argument("GaConfig: mutation_sigma must be > 0");
}

// Stable ascending by fitness; earlier candidate wins ties.
Population select_survivors(const Population& pop, int survivors) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return pop[a].fitness < pop[b].fitness; });
  Population out;
  out.reserve(survivors);
  for (int i = 0; i < survivors; ++i) out.push_back(pop[idx[i]]);
  return out;
}

// Uniformly random ordered pair of distinct survivor indices.
std::pair<std::size_t, std::size_t> draw_pair(std::size_t survivors, Rng& rng) {
  const std::size_t i = rng.index(survivors);
  std::size_t j = rng.index(survivors - 1);
  if (j >= i) ++j;
  return {i, j};
}

}  // namespace

Population init_population(const TaskInstance& task, int size, Rng& rng) {
  if (size < 1) throw std::invalid_argument("init_population: size must be >= 1");
  const FamilyDescriptor& desc = task.descriptor();
  Population pop;
  pop.reserve(size);
  for (int i = 0; i < size; ++i) {
    Candidate c;
    c.x.resize(desc.solution_dim);
    for (double& v : c.x) v = rng.uniform(desc.box_lo, desc.box_hi);
    c.fitness = task.fitness(c.x);
    pop.push_back(std::move(c));
  }
  return pop;
}

SearchTrace blind_search(const TaskInstance& task, int iterations, int batch, Rng& rng,
                         const MetricFn& metric) {
  if (iterations < 0) throw std::invalid_argument("blind_search: iterations must be >= 0");
  if (batch < 1) throw std::invalid_argument("blind_search: batch must be >= 1");
  SearchTrace trace;
  trace.strategy = "blind";
  trace.evaluations_per_step = batch;

  const FamilyDescriptor& desc = task.descriptor();
  Candidate best;
  best.x.resize(desc.solution_dim);
  std::vector<double> x(desc.solution_dim);
  for (int step = 0; step <= iterations; ++step) {
    for (int s = 0; s < batch; ++s) {
      for (double& v : x) v = rng.uniform(desc.box_lo, desc.box_hi);
      const double f = task.fitness(x);
      if ((step == 0 && s == 0) || f < best.fitness) {
        best.fitness = f;
        best.x = x;
      }
    }
    record(trace, task, metric, best);
  }
  return trace;
}

std::vector<double> mutate(std::span<const double> x, double sigma, const FamilyDescriptor& desc,
                           Rng& rng) {
  if (sigma <= 0.0) throw std::invalid_argument("mutate: sigma must be > 0");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = desc.clip(x[i] + rng.normal(0.0, sigma));
  return out;
}

std::vector<double> uniform_crossover(std::span<const double> x1, std::span<const double> x2,
                                      Rng& rng) {
  if (x1.size() != x2.size()) throw std::invalid_argument("uniform_crossover: length mismatch");
  std::vector<double> out(x1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform01() < 0.5 ? x1[i] : x2[i];
  return out;
}

Population ga_step(const Population& pop, const TaskInstance& task, const GaConfig& cfg,
                   const ChildFn& child_fn, Rng& rng) {
  check_ga_config(cfg);
  if (static_cast<int>(pop.size()) < cfg.survivors)
    throw std::invalid_argument("ga_step: population smaller than survivor count");

  Population next = select_survivors(pop, cfg.survivors);
  next.reserve(cfg.survivors + cfg.children);
  for (int c = 0; c < cfg.children; ++c) {
    const auto [i, j] = draw_pair(cfg.survivors, rng);
    Candidate child;
    child.x = child_fn(next[i].x, next[j].x, rng);
    child.fitness = task.fitness(child.x);
    next.push_back(std::move(child));
  }
  return next;
}

SearchTrace classic_ga(const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                       const MetricFn& metric) {
  check_ga_config(cfg);
  const FamilyDescriptor& desc = task.descriptor();
  ChildFn child = [&desc, &cfg](std::span<const double> x1, std::span<const double> x2,
                                Rng& r) {
    return mutate(uniform_crossover(x1, x2, r), cfg.mutation_sigma, desc, r);
  };

  SearchTrace trace;
  trace.strategy = "classic-ga";
  trace.evaluations_per_step = cfg.children;
  Population pop = init_population(task, cfg.children, rng);
  record(trace, task, metric, pop[best_index(pop)]);
  for (int g = 0; g < cfg.generations; ++g) {
    pop = ga_step(pop, task, cfg, child, rng);
    record(trace, task, metric, pop[best_index(pop)]);
  }
  return trace;
}

SearchTrace netd_solve(const Mlp& net, const TaskInstance& task, int generations,
                       const MetricFn& metric) {
  const FamilyDescriptor& desc = task.descriptor();
  if (net.input_dim() != desc.theta_dim || net.output_dim() != desc.solution_dim)
    throw std::invalid_argument("netd_solve: net dims do not match family");
  if (generations < 0) throw std::invalid_argument("netd_solve: generations must be >= 0");

  Candidate best;
  best.x = net.forward(encode_theta(task));
  desc.clip(best.x);
  best.fitness = task.fitness(best.x);

  SearchTrace trace;
  trace.strategy = "net-d";
  trace.evaluations_per_step = 0;
  trace.constant = true;
  for (int g = 0; g <= generations; ++g) record(trace, task, metric, best);
  return trace;
}

std::vector<double> assemble_netga_input(std::span<const double> x1, std::span<const double> x2,
                                         std::span<const double> theta) {
  std::vector<double> in;
  in.reserve(x1.size() + x2.size() + theta.size());
  in.insert(in.end(), x1.begin(), x1.end());
  in.insert(in.end(), x2.begin(), x2.end());
  in.insert(in.end(), theta.begin(), theta.end());
  return in;
}

std::vector<double> assemble_net1p_input(std::span<const double> x1,
                                         std::span<const double> theta) {
  std::vector<double> in;
  in.reserve(x1.size() + theta.size());
  in.insert(in.end(), x1.begin(), x1.end());
  in.insert(in.end(), theta.begin(), theta.end());
  return in;
}

std::vector<double> netga_child(const Mlp& net, std::span<const double> x1,
                                std::span<const double> x2, std::span<const double> theta,
                                double sigma, const FamilyDescriptor& desc, Rng& rng) {
  const std::vector<double> m1 = mutate(x1, sigma, desc, rng);
  const std::vector<double> m2 = mutate(x2, sigma, desc, rng);
  std::vector<double> out = net.forward(assemble_netga_input(m1, m2, theta));
  desc.clip(out);
  return out;
}

namespace {

// Shared GA loop for the trained operators. Children are produced by one
// batched forward pass per generation; per-row results are bit-identical to
// looping netga_child over the pairs.
SearchTrace run_net_ga(const Mlp& net, const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                       const MetricFn& metric, bool one_parent, const std::string& name) {
  check_ga_config(cfg);
  const FamilyDescriptor& desc = task.descriptor();
  const int sd = desc.solution_dim;
  const int expected_in = one_parent ? sd + desc.theta_dim : 2 * sd + desc.theta_dim;
  if (net.input_dim() != expected_in || net.output_dim() != sd)
    throw std::invalid_argument(name + ": net dims do not match family");

  const std::vector<double> theta = encode_theta(task);

  SearchTrace trace;
  trace.strategy = name;
  trace.evaluations_per_step = cfg.children;
  Population pop = init_population(task, cfg.children, rng);
  record(trace, task, metric, pop[best_index(pop)]);

  Matrix inputs(cfg.children, expected_in);
  for (int g = 0; g < cfg.generations; ++g) {
    Population next = select_survivors(pop, cfg.survivors);
    next.reserve(cfg.survivors + cfg.children);
    for (int c = 0; c < cfg.children; ++c) {
      double* row = inputs.row(c);
      if (one_parent) {
        const std::size_t i = rng.index(cfg.survivors);
        const std::vector<double> m1 = mutate(next[i].x, cfg.mutation_sigma, desc, rng);
        std::copy(m1.begin(), m1.end(), row);
      } else {
        const auto [i, j] = draw_pair(cfg.survivors, rng);
        const std::vector<double> m1 = mutate(next[i].x, cfg.mutation_sigma, desc, rng);
        const std::vector<double> m2 = mutate(next[j].x, cfg.mutation_sigma, desc, rng);
        std::copy(m1.begin(), m1.end(), row);
        std::copy(m2.begin(), m2.end(), row + sd);
      }
      std::copy(theta.begin(), theta.end(), row + expected_in - theta.size());
    }
    Matrix out = net.forward_batch(inputs);
    for (int c = 0; c < cfg.children; ++c) {
      Candidate child;
      child.x.assign(out.row(c), out.row(c) + sd);
      desc.clip(child.x);
      child.fitness = task.fitness(child.x);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    record(trace, task, metric, pop[best_index(pop)]);
  }
  return trace;
}

}  // namespace

SearchTrace net_ga(const Mlp& net, const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                   const MetricFn& metric) {
  return run_net_ga(net, task, cfg, rng, metric, false, "net-ga");
}

SearchTrace net_1p(const Mlp& net, const TaskInstance& task, const GaConfig& cfg, Rng& rng,
                   const MetricFn& metric) {
  return run_net_ga(net, task, cfg, rng, metric, true, "net-1p");
}

}  // namespace specga
