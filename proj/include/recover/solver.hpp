#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recover/model.hpp"

namespace recover {

struct SolveParams {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  std::size_t node_limit = 100000;
  std::optional<double> time_limit;  // seconds
  double gap_tol = 1e-9;             // relative
  // Dense-tableau caps; larger models are rejected with SizeLimitError.
  std::size_t max_variables = 2000;
  std::size_t max_constraints = 2000;

  void validate() const;
};

struct SolveStats {
  std::size_t simplex_iterations = 0;
  std::size_t nodes_explored = 0;
  double best_bound = -kInf;
  double wall_time = 0.0;  // seconds
  std::string diagnostic;
};

// Throws SizeLimitError if the model exceeds the kernel caps.
void check_size(const Model& model, const SolveParams& params);

/// LP relaxation: integer kinds are treated as continuous.
std::pair<Solution, SolveStats> solve_lp(const Model& model, const SolveParams& params = {});

/// Branch-and-bound over the LP relaxation. Most-fractional branching (lowest
/// index on ties), best-first node selection (FIFO on ties).
std::pair<Solution, SolveStats> solve_milp(const Model& model, const SolveParams& params = {});

namespace detail {

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

struct LpOutcome {
  Status status = Status::LimitReached;
  std::vector<double> x;  // structural values
  double objective = 0.0;
  std::size_t iterations = 0;
  std::string diagnostic;
};

/// Constraint data extracted once from a model, re-solved under varying bounds.
class LpProblem {
 public:
  explicit LpProblem(const Model& model);

  LpOutcome solve(std::span<const double> lower, std::span<const double> upper, const SolveParams& params,
                  const Deadline& deadline) const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> matrix_;  // rows_ x cols_
  std::vector<double> rhs_;
  std::vector<Sense> sense_;
  std::vector<double> cost_;
  double cost_constant_ = 0.0;
};

}  // namespace detail
}  // namespace recover
