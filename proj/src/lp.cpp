#include "hadwiger/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace hadwiger::lp {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-10;

// Tableau layout: rows 0..m-1 are constraints, row m is the objective
// (reduced costs); columns 0..n-1 structural, n..n+m-1 artificial, last RHS.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& E, const Eigen::VectorXd& f)
      : m_(E.rows()), n_(E.cols()), t_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1)),
        basis_(m_), sign_(m_) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      sign_[i] = f(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign_[i] * E.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign_[i] * f(i);
      basis_[i] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  // Loads objective over all columns (artificials included) and prices out
  // the basis.
  void set_objective(const Eigen::VectorXd& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(cost.size()) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = t_(m_, basis_[i]);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Returns false when unbounded. `allowed` limits entering columns.
  bool optimize(Eigen::Index allowed) {
    const int max_iter = 50 * static_cast<int>(m_ + n_ + 10);
    for (int iter = 0; iter < max_iter; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(m_, j) < -kCostEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = t_(i, rhs()) / a;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    return true;  // iteration cap; Bland's rule makes this unreachable in practice
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double factor = t_(i, col);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(row);
    }
    basis_[row] = col;
  }

  // Moves zero-level artificials out of the basis where possible.
  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  double objective_value() const { return -t_(m_, rhs()); }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) y(basis_[i]) = t_(i, rhs());
    }
    return y;
  }

  // Simplex multipliers recovered from the artificial columns, which hold
  // B^{-1} of the sign-normalized system.
  Eigen::VectorXd duals() const {
    Eigen::VectorXd pi(m_);
    for (Eigen::Index k = 0; k < m_; ++k) pi(k) = -t_(m_, n_ + k) * sign_[k];
    return pi;
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return n_; }

 private:
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  std::vector<double> sign_;
};

}  // namespace

double feasibility_residual(const Eigen::MatrixXd& E, const Eigen::VectorXd& f,
                            Eigen::VectorXd* y) {
  Tableau tab(E, f);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(E.cols() + E.rows());
  phase1.tail(E.rows()).setOnes();
  tab.set_objective(phase1);
  tab.optimize(E.cols());
  if (y) *y = tab.solution();
  return tab.objective_value();
}

Result minimize_standard(const Eigen::MatrixXd& E, const Eigen::VectorXd& f,
                         const Eigen::VectorXd& c) {
  Result result;
  Tableau tab(E, f);
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(E.cols() + E.rows());
  phase1.tail(E.rows()).setOnes();
  tab.set_objective(phase1);
  tab.optimize(E.cols());
  const double scale = 1.0 + f.cwiseAbs().sum();
  if (tab.objective_value() > 1e-9 * scale) {
    result.status = Status::Infeasible;
    return result;
  }
  tab.drive_out_artificials();
  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(E.cols() + E.rows());
  phase2.head(E.cols()) = c;
  tab.set_objective(phase2);
  if (!tab.optimize(E.cols())) {
    result.status = Status::Unbounded;
    return result;
  }
  result.status = Status::Optimal;
  result.objective = tab.objective_value();
  result.x = tab.solution();
  result.dual = tab.duals();
  return result;
}

}  // namespace hadwiger::lp
