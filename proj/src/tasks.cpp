#include "specga/tasks.hpp"

#include <cmath>
#include <stdexcept>

#include "specga/errors.hpp"
#include "specga/linalg.hpp"

namespace specga {

namespace {

constexpr double kLinearPivotTol = 1e-10;
constexpr double kLinearSolutionNormCap = 6.0;
constexpr double kLinearResidualCap = 1e-9;
constexpr int kLogRegOracleMaxIters = 10000;
constexpr double kLogRegOracleStep = 0.5;
constexpr double kLogRegOracleGradTol = 1e-6;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logistic(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

std::string family_to_string(Family f) {
  switch (f) {
    case Family::Quadratic: return "quadratic";
    case Family::Linear: return "linear";
    case Family::LogReg: return "logreg";
  }
  throw std::invalid_argument("family_to_string: bad family");
}

Family family_from_string(const std::string& s) {
  if (s == "quadratic") return Family::Quadratic;
  if (s == "linear") return Family::Linear;
  if (s == "logreg") return Family::LogReg;
  throw ConfigError("unknown family: " + s);
}

// ---------------------------------------------------------------------------

QuadraticTask sample_quadratic(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_quadratic: n must be >= 1");
  QuadraticTask task;
  task.a.resize(n);
  task.b.resize(n);
  for (int i = 0; i < n; ++i) task.a[i] = rng.uniform(0.1, 1.1);
  for (int i = 0; i < n; ++i) task.b[i] = rng.uniform(-1.0, 1.0);
  return task;
}

double quadratic_fitness(const QuadraticTask& task, std::span<const double> x) {
  if (x.size() != task.a.size()) throw std::invalid_argument("quadratic_fitness: dim mismatch");
  double f = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) f += task.a[i] * x[i] * x[i] + task.b[i] * x[i];
  return f;
}

std::vector<double> quadratic_oracle(const QuadraticTask& task) {
  std::vector<double> x(task.a.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (task.a[i] <= 0.0) throw std::invalid_argument("quadratic_oracle: nonpositive a");
    x[i] = -task.b[i] / (2.0 * task.a[i]);
  }
  return x;
}

// ---------------------------------------------------------------------------

LinearTask sample_linear(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_linear: n must be >= 1");
  LinearTask task;
  for (;;) {
    task.a = Matrix(n, n);
    task.b.resize(n);
    for (double& v : task.a.data) v = rng.uniform(-1.0, 1.0);
    for (double& v : task.b) v = rng.uniform(-1.0, 1.0);
    auto sol = solve_linear_system(task.a, task.b, kLinearPivotTol);
    if (!sol) continue;
    if (norm2(*sol) > kLinearSolutionNormCap) continue;
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
      double s = -task.b[i];
      const double* row = task.a.row(i);
      for (int j = 0; j < n; ++j) s += row[j] * (*sol)[j];
      r[i] = s;
    }
    if (norm2(r) > kLinearResidualCap) continue;
    task.solution = std::move(*sol);
    return task;
  }
}

double linear_fitness(const LinearTask& task, std::span<const double> x) {
  const int n = task.a.rows;
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("linear_fitness: dim mismatch");
  double f = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = -task.b[i];
    const double* row = task.a.row(i);
    for (int j = 0; j < n; ++j) s += row[j] * x[j];
    f += s * s;
  }
  return f;
}

const std::vector<double>& linear_oracle(const LinearTask& task) { return task.solution; }

// ---------------------------------------------------------------------------

LogRegTask make_logreg_task(int n, int n_train, double center_distance, Rng& rng) {
  if (n < 1) throw std::invalid_argument("make_logreg_task: n must be >= 1");
  if (n_train < 2) throw std::invalid_argument("make_logreg_task: n_train must be >= 2");

  LogRegTask task;
  task.sigma = 1.0;

  // Random direction; centers straddle the origin.
  std::vector<double> dir(n);
  double d2;
  do {
    for (double& v : dir) v = rng.normal();
    d2 = norm2(dir);
  } while (d2 == 0.0);
  task.center_pos.resize(n);
  task.center_neg.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = dir[i] / d2 * (center_distance / 2.0);
    task.center_pos[i] = u;
    task.center_neg[i] = -u;
  }

  // Uniform labels, redrawn until both classes appear.
  task.labels.resize(n_train);
  for (;;) {
    bool pos = false, neg = false;
    for (double& y : task.labels) {
      y = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      (y > 0 ? pos : neg) = true;
    }
    if (pos && neg) break;
  }

  task.patterns = Matrix(n_train, n);
  for (int i = 0; i < n_train; ++i) {
    const auto& c = task.labels[i] > 0 ? task.center_pos : task.center_neg;
    double* row = task.patterns.row(i);
    for (int j = 0; j < n; ++j) row[j] = rng.normal(c[j], task.sigma);
  }

  task.test_labels.resize(kLogRegTestPoints);
  task.test_patterns = Matrix(kLogRegTestPoints, n);
  for (int i = 0; i < kLogRegTestPoints; ++i) {
    task.test_labels[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    const auto& c = task.test_labels[i] > 0 ? task.center_pos : task.center_neg;
    double* row = task.test_patterns.row(i);
    for (int j = 0; j < n; ++j) row[j] = rng.normal(c[j], task.sigma);
  }
  return task;
}

LogRegTask sample_logreg(int n, int n_train, Rng& rng) {
  const double d = rng.uniform(2.0, 3.0);
  return make_logreg_task(n, n_train, d, rng);
}

double logreg_data_loss(const LogRegTask& task, std::span<const double> w) {
  const int n = task.patterns.cols;
  if (static_cast<int>(w.size()) != n + 1)
    throw std::invalid_argument("logreg loss: dim mismatch");
  const double bias = w[n];
  double loss = 0.0;
  for (int i = 0; i < task.patterns.rows; ++i) {
    const double* p = task.patterns.row(i);
    double m = bias;
    for (int j = 0; j < n; ++j) m += w[j] * p[j];
    loss += softplus(-task.labels[i] * m);
  }
  return loss / task.patterns.rows;
}

double logreg_fitness(const LogRegTask& task, std::span<const double> w) {
  const int n = task.patterns.cols;
  double reg = 0.0;
  for (int j = 0; j < n; ++j) reg += w[j] * w[j];
  return logreg_data_loss(task, w) + kLogRegLambda * reg;
}

double logreg_fitness_grad(const LogRegTask& task, std::span<const double> w,
                           std::vector<double>& grad) {
  const int n = task.patterns.cols;
  if (static_cast<int>(w.size()) != n + 1)
    throw std::invalid_argument("logreg grad: dim mismatch");
  const double bias = w[n];
  grad.assign(n + 1, 0.0);
  double loss = 0.0;
  for (int i = 0; i < task.patterns.rows; ++i) {
    const double* p = task.patterns.row(i);
    const double y = task.labels[i];
    double m = bias;
    for (int j = 0; j < n; ++j) m += w[j] * p[j];
    loss += softplus(-y * m);
    const double g = -y * logistic(-y * m);
    for (int j = 0; j < n; ++j) grad[j] += g * p[j];
    grad[n] += g;
  }
  const double inv = 1.0 / task.patterns.rows;
  loss *= inv;
  double reg = 0.0;
  for (int j = 0; j < n; ++j) {
    grad[j] = grad[j] * inv + 2.0 * kLogRegLambda * w[j];
    reg += w[j] * w[j];
  }
  grad[n] *= inv;
  return loss + kLogRegLambda * reg;
}

std::vector<double> logreg_oracle(const LogRegTask& task) {
  const int n = task.patterns.cols;
  std::vector<double> w(n + 1, 0.0);
  std::vector<double> grad;
  for (int it = 0; it < kLogRegOracleMaxIters; ++it) {
    logreg_fitness_grad(task, w, grad);
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    if (gmax < kLogRegOracleGradTol) return w;
    for (int j = 0; j <= n; ++j) w[j] -= kLogRegOracleStep * grad[j];
  }
  logreg_fitness_grad(task, w, grad);
  double gmax = 0.0;
  for (double g : grad) gmax = std::max(gmax, std::abs(g));
  throw NumericError("logreg_oracle: no convergence after " +
                     std::to_string(kLogRegOracleMaxIters) +
                     " iterations, gradient inf-norm " + std::to_string(gmax));
}

namespace {

double recognition_on(const Matrix& patterns, const std::vector<double>& labels,
                      std::span<const double> w) {
  const int n = patterns.cols;
  if (static_cast<int>(w.size()) != n + 1)
    throw std::invalid_argument("recognition: dim mismatch");
  const double bias = w[n];
  int correct = 0;
  for (int i = 0; i < patterns.rows; ++i) {
    const double* p = patterns.row(i);
    double m = bias;
    for (int j = 0; j < n; ++j) m += w[j] * p[j];
    const double pred = m >= 0.0 ? 1.0 : -1.0;
    if (pred == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / patterns.rows;
}

}  // namespace

double logreg_recognition(const LogRegTask& task, std::span<const double> w) {
  return recognition_on(task.test_patterns, task.test_labels, w);
}

double logreg_training_recognition(const LogRegTask& task, std::span<const double> w) {
  return recognition_on(task.patterns, task.labels, w);
}

// ---------------------------------------------------------------------------

FamilyDescriptor make_descriptor(Family family, int dimension, int n_train) {
  if (dimension < 1) throw std::invalid_argument("make_descriptor: dimension must be >= 1");
  FamilyDescriptor d;
  d.family = family;
  d.dimension = dimension;
  switch (family) {
    case Family::Quadratic:
      d.solution_dim = dimension;
      d.theta_dim = 2 * dimension;
      d.box_lo = -5.0;
      d.box_hi = 5.0;
      break;
    case Family::Linear:
      d.solution_dim = dimension;
      d.theta_dim = dimension * dimension + dimension;
      d.box_lo = -6.0;
      d.box_hi = 6.0;
      break;
    case Family::LogReg:
      if (n_train < 2) throw std::invalid_argument("make_descriptor: n_train must be >= 2");
      d.n_train = n_train;
      d.solution_dim = dimension + 1;
      d.theta_dim = n_train * (dimension + 1);
      d.box_lo = -6.0;
      d.box_hi = 6.0;
      break;
  }
  return d;
}

TaskInstance::TaskInstance(FamilyDescriptor desc, QuadraticTask t)
    : desc_(desc), task_(std::move(t)) {}
TaskInstance::TaskInstance(FamilyDescriptor desc, LinearTask t)
    : desc_(desc), task_(std::move(t)) {}
TaskInstance::TaskInstance(FamilyDescriptor desc, LogRegTask t)
    : desc_(desc), task_(std::move(t)) {}

TaskInstance TaskInstance::sample(Family family, int dimension, int n_train, Rng& rng) {
  FamilyDescriptor desc = make_descriptor(family, dimension, n_train);
  switch (family) {
    case Family::Quadratic: return TaskInstance(desc, sample_quadratic(dimension, rng));
    case Family::Linear: return TaskInstance(desc, sample_linear(dimension, rng));
    case Family::LogReg: return TaskInstance(desc, sample_logreg(dimension, n_train, rng));
  }
  throw std::invalid_argument("TaskInstance::sample: bad family");
}

TaskInstance TaskInstance::sample(Family family, int dimension, int n_train, std::uint64_t seed) {
  Rng rng(seed);
  return sample(family, dimension, n_train, rng);
}

double TaskInstance::fitness(std::span<const double> x) const {
  switch (desc_.family) {
    case Family::Quadratic: return quadratic_fitness(quadratic(), x);
    case Family::Linear: return linear_fitness(linear(), x);
    case Family::LogReg: return logreg_fitness(logreg(), x);
  }
  throw std::invalid_argument("fitness: bad family");
}

std::vector<double> TaskInstance::oracle() const {
  switch (desc_.family) {
    case Family::Quadratic: return quadratic_oracle(quadratic());
    case Family::Linear: return linear_oracle(linear());
    case Family::LogReg: return logreg_oracle(logreg());
  }
  throw std::invalid_argument("oracle: bad family");
}

std::vector<double> encode_theta(const TaskInstance& task) {
  std::vector<double> theta;
  theta.reserve(task.descriptor().theta_dim);
  switch (task.family()) {
    case Family::Quadratic: {
      const auto& t = task.quadratic();
      theta.insert(theta.end(), t.a.begin(), t.a.end());
      theta.insert(theta.end(), t.b.begin(), t.b.end());
      break;
    }
    case Family::Linear: {
      const auto& t = task.linear();
      theta.insert(theta.end(), t.a.data.begin(), t.a.data.end());
      theta.insert(theta.end(), t.b.begin(), t.b.end());
      break;
    }
    case Family::LogReg: {
      const auto& t = task.logreg();
      for (int i = 0; i < t.patterns.rows; ++i) {
        const double* row = t.patterns.row(i);
        theta.insert(theta.end(), row, row + t.patterns.cols);
        theta.push_back(t.labels[i]);
      }
      break;
    }
  }
  return theta;
}

}  // namespace specga
