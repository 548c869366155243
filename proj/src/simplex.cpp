// Bounded-variable primal simplex on a dense tableau.
//
// Column layout: [0, n) structural, [n, n + s) slacks, [n + s, n + s + m)
// artificials. Tableau rows [0, m) hold B^-1 A; row m holds reduced costs.

#include <algorithm>
#include <cmath>

#include "recover/error.hpp"
#include "recover/kernels.hpp"
#include "recover/solver.hpp"

namespace recover::detail {

using kernels::DenseMatrix;

LpProblem::LpProblem(const Model& model)
    : rows_(model.num_constraints()), cols_(model.num_variables()), matrix_(rows_ * cols_, 0.0) {
  rhs_.reserve(rows_);
  sense_.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto& c = model.constraints()[i];
    for (const auto& t : c.expr.terms()) matrix_[i * cols_ + t.var.index] = t.coefficient;
    rhs_.push_back(c.rhs - c.expr.constant());
    sense_.push_back(c.sense);
  }
  cost_.assign(cols_, 0.0);
  for (const auto& t : model.objective().terms()) cost_[t.var.index] = t.coefficient;
  cost_constant_ = model.objective().constant();
}

namespace {

constexpr double kOptTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;
constexpr std::size_t kBlandAfter = 50;
constexpr std::size_t kRefactorEvery = 200;

enum class ColState { Basic, AtLower, AtUpper, Free };

class BoundedSimplex {
 public:
  BoundedSimplex(std::size_t rows, std::size_t cols, std::span<const double> matrix,
                 std::span<const double> rhs, std::span<const Sense> sense, std::span<const double> cost,
                 std::span<const double> lower, std::span<const double> upper, const SolveParams& params,
                 const Deadline& deadline)
      : m_(rows), n_(cols), params_(params), deadline_(deadline), struct_cost_(cost.begin(), cost.end()) {
    slacks_ = static_cast<std::size_t>(std::count_if(sense.begin(), sense.end(),
                                                     [](Sense s) { return s != Sense::Equal; }));
    total_ = n_ + slacks_ + m_;
    orig_ = DenseMatrix(m_, total_);
    lo_.assign(total_, 0.0);
    hi_.assign(total_, kInf);
    x_.assign(total_, 0.0);
    state_.assign(total_, ColState::AtLower);
    blocked_.assign(total_, false);
    b_.assign(rhs.begin(), rhs.end());

    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      if (std::isfinite(lo_[j])) {
        state_[j] = ColState::AtLower;
        x_[j] = lo_[j];
      } else if (std::isfinite(hi_[j])) {
        state_[j] = ColState::AtUpper;
        x_[j] = hi_[j];
      } else {
        state_[j] = ColState::Free;
        x_[j] = 0.0;
      }
    }
    std::size_t slack = n_;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) orig_(i, j) = matrix[i * n_ + j];
      if (sense[i] == Sense::LessEqual) orig_(i, slack++) = 1.0;
      if (sense[i] == Sense::GreaterEqual) orig_(i, slack++) = -1.0;
    }

    // Artificial basis absorbing the residual of the initial nonbasic point.
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double residual = b_[i];
      for (std::size_t j = 0; j < n_ + slacks_; ++j) residual -= orig_(i, j) * x_[j];
      const std::size_t art = n_ + slacks_ + i;
      orig_(i, art) = residual >= 0.0 ? 1.0 : -1.0;
      x_[art] = std::abs(residual);
      state_[art] = ColState::Basic;
      basis_[i] = art;
    }
    tab_ = DenseMatrix(m_ + 1, total_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = orig_(i, n_ + slacks_ + i);
      for (std::size_t j = 0; j < total_; ++j) tab_(i, j) = sign * orig_(i, j);
    }
  }

  LpOutcome run() {
    LpOutcome out;
    // Phase 1: minimize the sum of artificials.
    cost_.assign(total_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) cost_[n_ + slacks_ + i] = 1.0;
    price_from_scratch();
    if (auto st = iterate(); st != Status::Optimal) return finish(out, st == Status::Unbounded ? Status::LimitReached : st,
                                                                    "phase 1 did not converge");
    if (!reinvert()) return finish(out, Status::LimitReached, "singular basis after phase 1");
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m_; ++i) infeasibility = std::max(infeasibility, x_[n_ + slacks_ + i]);
    if (infeasibility > params_.feas_tol) return finish(out, Status::Infeasible, "");

    drive_out_artificials();
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t art = n_ + slacks_ + i;
      lo_[art] = hi_[art] = 0.0;
      blocked_[art] = true;
      if (state_[art] != ColState::Basic) {
        state_[art] = ColState::AtLower;
        x_[art] = 0.0;
      }
    }

    // Phase 2: original objective.
    cost_.assign(total_, 0.0);
    std::copy(struct_cost_.begin(), struct_cost_.end(), cost_.begin());
    price_from_scratch();
    for (int round = 0; round < 4; ++round) {
      const Status st = iterate();
      if (st != Status::Optimal) return finish(out, st, st == Status::LimitReached ? "iteration or time limit" : "");
      if (!reinvert()) return finish(out, Status::LimitReached, "singular basis after phase 2");
      if (!primal_feasible()) return finish(out, Status::LimitReached, "numerical breakdown: primal infeasible after refactorization");
      if (dual_feasible()) return finish(out, Status::Optimal, "");
    }
    return finish(out, Status::LimitReached, "numerical breakdown: optimality not confirmed");
  }

 private:
  LpOutcome& finish(LpOutcome& out, Status status, std::string diagnostic) {
    out.status = status;
    out.iterations = iterations_;
    out.diagnostic = std::move(diagnostic);
    if (status == Status::Optimal) {
      out.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
      for (std::size_t j = 0; j < n_; ++j) out.x[j] = std::clamp(out.x[j], lo_[j], hi_[j]);
    }
    return out;
  }

  void price_from_scratch() {
    auto d = tab_.row(m_);
    for (std::size_t j = 0; j < total_; ++j) {
      double v = cost_[j];
      for (std::size_t i = 0; i < m_; ++i) v -= cost_[basis_[i]] * tab_(i, j);
      d[j] = v;
    }
    for (std::size_t i = 0; i < m_; ++i) d[basis_[i]] = 0.0;
  }

  bool timed_out() const {
    return deadline_ && std::chrono::steady_clock::now() > *deadline_;
  }

  std::size_t iteration_cap() const { return 20000 + 50 * (m_ + total_); }

  // Returns Optimal when no improving column remains.
  Status iterate() {
    std::size_t degenerate_run = 0;
    while (true) {
      if (iterations_ >= iteration_cap() || timed_out()) return Status::LimitReached;
      const bool bland = degenerate_run >= kBlandAfter;

      // Pricing.
      std::size_t enter = total_;
      double direction = 0.0;
      double best = 0.0;
      for (std::size_t j = 0; j < total_; ++j) {
        if (state_[j] == ColState::Basic || blocked_[j] || lo_[j] == hi_[j]) continue;
        const double d = tab_(m_, j);
        double dir = 0.0;
        if (d < -kOptTol && (state_[j] == ColState::AtLower || state_[j] == ColState::Free)) dir = 1.0;
        if (d > kOptTol && (state_[j] == ColState::AtUpper || state_[j] == ColState::Free)) dir = -1.0;
        if (dir == 0.0) continue;
        if (bland) {
          enter = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          direction = dir;
        }
      }
      if (enter == total_) return Status::Optimal;

      // Ratio test.
      double step = (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter])) ? hi_[enter] - lo_[enter] : kInf;
      std::size_t leave_row = m_;
      double leave_alpha = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = tab_(i, enter) * direction;
        if (std::abs(alpha) <= kPivotTol) continue;
        const std::size_t bi = basis_[i];
        double ratio = kInf;
        if (alpha > 0.0 && std::isfinite(lo_[bi])) ratio = std::max(0.0, (x_[bi] - lo_[bi]) / alpha);
        if (alpha < 0.0 && std::isfinite(hi_[bi])) ratio = std::max(0.0, (hi_[bi] - x_[bi]) / -alpha);
        if (!std::isfinite(ratio)) continue;
        bool take = false;
        if (ratio < step - kDegenerateStep) {
          take = true;
        } else if (ratio <= step + kDegenerateStep && leave_row != m_) {
          take = bland ? basis_[i] < basis_[leave_row] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          step = ratio;
          leave_row = i;
          leave_alpha = alpha;
        }
      }
      if (!std::isfinite(step)) return Status::Unbounded;

      ++iterations_;
      degenerate_run = step <= kDegenerateStep ? degenerate_run + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= direction * step * tab_(i, enter);
      x_[enter] += direction * step;

      if (leave_row == m_) {
        // Bound flip, basis unchanged.
        if (direction > 0.0) {
          state_[enter] = ColState::AtUpper;
          x_[enter] = hi_[enter];
        } else {
          state_[enter] = ColState::AtLower;
          x_[enter] = lo_[enter];
        }
        continue;
      }

      const std::size_t leaving = basis_[leave_row];
      if (leave_alpha > 0.0) {
        state_[leaving] = ColState::AtLower;
        x_[leaving] = lo_[leaving];
      } else {
        state_[leaving] = ColState::AtUpper;
        x_[leaving] = hi_[leaving];
      }
      basis_[leave_row] = enter;
      state_[enter] = ColState::Basic;
      kernels::pivot(tab_, leave_row, enter);
      if (++pivots_since_refactor_ >= kRefactorEvery) {
        if (!reinvert()) return Status::LimitReached;
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_ + slacks_) continue;
      std::size_t best = total_;
      double best_abs = 1e-9;
      for (std::size_t j = 0; j < n_ + slacks_; ++j) {
        if (state_[j] == ColState::Basic) continue;
        if (std::abs(tab_(r, j)) > best_abs) {
          best_abs = std::abs(tab_(r, j));
          best = j;
        }
      }
      if (best == total_) continue;  // redundant row; artificial stays basic at zero
      const std::size_t art = basis_[r];
      const double theta = x_[art] / tab_(r, best);
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= theta * tab_(i, best);
      x_[best] += theta;
      x_[art] = 0.0;
      state_[art] = ColState::AtLower;
      basis_[r] = best;
      state_[best] = ColState::Basic;
      kernels::pivot(tab_, r, best);
    }
  }

  // Rebuilds B^-1 A, basic values, and reduced costs from the original data.
  bool reinvert() {
    pivots_since_refactor_ = 0;
    DenseMatrix basis_matrix(m_, m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < m_; ++k) basis_matrix(i, k) = orig_(i, basis_[k]);
    }
    if (!kernels::invert(basis_matrix)) return false;
    DenseMatrix body;
    kernels::multiply(basis_matrix, orig_, body);
    for (std::size_t i = 0; i < m_; ++i) {
      auto dst = tab_.row(i);
      auto src = body.row(i);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    std::vector<double> residual(b_);
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == ColState::Basic || x_[j] == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) residual[i] -= orig_(i, j) * x_[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < m_; ++k) v += basis_matrix(i, k) * residual[k];
      x_[basis_[i]] = v;
    }
    price_from_scratch();
    return true;
  }

  bool primal_feasible() const {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t bi = basis_[i];
      if (x_[bi] < lo_[bi] - params_.feas_tol || x_[bi] > hi_[bi] + params_.feas_tol) return false;
    }
    return true;
  }

  bool dual_feasible() const {
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == ColState::Basic || blocked_[j] || lo_[j] == hi_[j]) continue;
      const double d = tab_(m_, j);
      if (d < -kOptTol && (state_[j] == ColState::AtLower || state_[j] == ColState::Free)) return false;
      if (d > kOptTol && (state_[j] == ColState::AtUpper || state_[j] == ColState::Free)) return false;
    }
    return true;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t slacks_ = 0;
  std::size_t total_ = 0;
  const SolveParams& params_;
  const Deadline& deadline_;
  std::vector<double> struct_cost_;

  DenseMatrix orig_;
  DenseMatrix tab_;
  std::vector<double> b_;
  std::vector<double> lo_, hi_, x_, cost_;
  std::vector<ColState> state_;
  std::vector<bool> blocked_;
  std::vector<std::size_t> basis_;
  std::size_t iterations_ = 0;
  std::size_t pivots_since_refactor_ = 0;
};

}  // namespace

LpOutcome LpProblem::solve(std::span<const double> lower, std::span<const double> upper, const SolveParams& params,
                           const Deadline& deadline) const {
  for (std::size_t j = 0; j < cols_; ++j) {
    if (lower[j] > upper[j]) {
      LpOutcome out;
      out.status = Status::Infeasible;
      return out;
    }
  }
  BoundedSimplex simplex(rows_, cols_, matrix_, rhs_, sense_, cost_, lower, upper, params, deadline);
  LpOutcome out = simplex.run();
  if (out.status == Status::Optimal) {
    double obj = cost_constant_;
    for (std::size_t j = 0; j < cols_; ++j) obj += cost_[j] * out.x[j];
    out.objective = obj;
  }
  return out;
}

}  // namespace recover::detail
