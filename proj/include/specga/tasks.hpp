#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "specga/matrix.hpp"
#include "specga/rng.hpp"

namespace specga {

enum class Family { Quadratic, Linear, LogReg };

std::string family_to_string(Family f);
Family family_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Quadratic: f(x | a, b) = sum_i a_i x_i^2 + b_i x_i, minimum at -b / (2a).

struct QuadraticTask {
  std::vector<double> a;  // each in [0.1, 1.1]
  std::vector<double> b;  // each in [-1, 1]
};

QuadraticTask sample_quadratic(int n, Rng& rng);
double quadratic_fitness(const QuadraticTask& task, std::span<const double> x);
std::vector<double> quadratic_oracle(const QuadraticTask& task);

// ---------------------------------------------------------------------------
// Linear: f(x | A, b) = ||A x - b||^2. Sampling rejects systems whose exact
// solution is out of reach (pivot below 1e-10) or has norm above 6.

struct LinearTask {
  Matrix a;                      // n x n, entries in [-1, 1]
  std::vector<double> b;         // entries in [-1, 1]
  std::vector<double> solution;  // exact solve, ||.||_2 <= 6, residual <= 1e-9
};

LinearTask sample_linear(int n, Rng& rng);
double linear_fitness(const LinearTask& task, std::span<const double> x);
const std::vector<double>& linear_oracle(const LinearTask& task);

// ---------------------------------------------------------------------------
// Logistic regression: theta is a labelled training sample drawn from two
// unit-sigma Gaussians whose centers sit 2..3 sigma apart; x is the weight
// vector (bias last). 200 held-out points score recognition.

struct LogRegTask {
  Matrix patterns;        // n_train x n
  std::vector<double> labels;  // +-1
  Matrix test_patterns;   // 200 x n
  std::vector<double> test_labels;
  double sigma = 1.0;
  std::vector<double> center_pos;
  std::vector<double> center_neg;
};

inline constexpr int kLogRegTestPoints = 200;
inline constexpr double kLogRegLambda = 0.1;

LogRegTask sample_logreg(int n, int n_train, Rng& rng);
// Same construction with the center distance fixed instead of drawn.
LogRegTask make_logreg_task(int n, int n_train, double center_distance, Rng& rng);

// Mean logistic loss without the regularizer.
double logreg_data_loss(const LogRegTask& task, std::span<const double> w);
// logreg_data_loss + lambda * ||w_weights||^2 (bias unpenalized), lambda = 0.1.
double logreg_fitness(const LogRegTask& task, std::span<const double> w);
double logreg_fitness_grad(const LogRegTask& task, std::span<const double> w,
                           std::vector<double>& grad);
// Full-batch gradient descent, step 0.5, stops when the gradient infinity
// norm drops below 1e-6; throws NumericError after 10000 iterations.
std::vector<double> logreg_oracle(const LogRegTask& task);
// Fraction of the 200 held-out points with sign(w.p + bias) matching the
// label; sign(0) counts as +1.
double logreg_recognition(const LogRegTask& task, std::span<const double> w);
double logreg_training_recognition(const LogRegTask& task, std::span<const double> w);

// ---------------------------------------------------------------------------

struct FamilyDescriptor {
  Family family = Family::Quadratic;
  int dimension = 0;     // N
  int n_train = 0;       // logreg only
  int solution_dim = 0;  // N, or N+1 for logreg
  int theta_dim = 0;     // 2N; N^2+N; n_train*(N+1)
  double box_lo = 0.0;   // search box, same bound on every coordinate
  double box_hi = 0.0;

  double clip(double v) const { return v < box_lo ? box_lo : (v > box_hi ? box_hi : v); }
  void clip(std::span<double> x) const {
    for (double& v : x) v = clip(v);
  }
};

FamilyDescriptor make_descriptor(Family family, int dimension, int n_train = 0);

// One sampled theta plus the family it came from.
class TaskInstance {
 public:
  static TaskInstance sample(Family family, int dimension, int n_train, Rng& rng);
  static TaskInstance sample(Family family, int dimension, int n_train, std::uint64_t seed);

  explicit TaskInstance(FamilyDescriptor desc, QuadraticTask t);
  explicit TaskInstance(FamilyDescriptor desc, LinearTask t);
  explicit TaskInstance(FamilyDescriptor desc, LogRegTask t);

  Family family() const { return desc_.family; }
  const FamilyDescriptor& descriptor() const { return desc_; }

  double fitness(std::span<const double> x) const;
  std::vector<double> oracle() const;

  const QuadraticTask& quadratic() const { return std::get<QuadraticTask>(task_); }
  const LinearTask& linear() const { return std::get<LinearTask>(task_); }
  const LogRegTask& logreg() const { return std::get<LogRegTask>(task_); }

 private:
  FamilyDescriptor desc_;
  std::variant<QuadraticTask, LinearTask, LogRegTask> task_;
};

// Flattened network input: quadratic [a || b]; linear [A row-major || b];
// logreg [p1 || y1 || p2 || y2 || ...] in sampling order.
std::vector<double> encode_theta(const TaskInstance& task);

}  // namespace specga
