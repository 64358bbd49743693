#pragma once

#include <Eigen/Dense>

namespace hadwiger::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;     // primal solution of the standard-form problem
  Eigen::VectorXd dual;  // multipliers of the equality rows, one per row
};

// Dense two-phase simplex with Bland's rule for
//
//   minimize c'y  subject to  E y = f,  y >= 0.
//
// Sized for desk-scale problems (a few hundred rows or columns). The duals
// satisfy E' dual <= c at optimality and f' dual equals the objective.
Result minimize_standard(const Eigen::MatrixXd& E, const Eigen::VectorXd& f,
                         const Eigen::VectorXd& c);

// Phase one only: min ||E y - f||_1 over y >= 0. Returns the residual.
double feasibility_residual(const Eigen::MatrixXd& E, const Eigen::VectorXd& f,
                            Eigen::VectorXd* y = nullptr);

}  // namespace hadwiger::lp
