#pragma once
// Time steppers for dp/dt = A(t) p on truncated spaces. Constant generators
// use a Krylov approximation of the matrix exponential action with incomplete
// orthogonalization; time-varying generators use a 4-stage third-order
// L-stable Rosenbrock-W scheme with an embedded second-order error estimate.
// A dense scaling-and-squaring exponential is kept as an oracle for tests.

#include <functional>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mfst {

struct IntegratorConfig {
  double abs_tol = 1e-14;
  double rel_tol = 1e-4;
  int krylov_basis = 30;
  double max_step = std::numeric_limits<double>::infinity();
  bool fixed_step = false;  // step exactly max_step; order-check harness only
};

struct StepperStats {
  long long steps = 0;
  long long rejections = 0;
};

// exp(dt*A) for dense A (scaling-and-squaring Pade). Test oracle only,
// refuses matrices above 2000 rows.
Eigen::MatrixXd dense_reference_expm(const Eigen::MatrixXd& A, double dt);

// exp(dt*A) * v via Krylov projection with incomplete orthogonalization
// (two-vector recurrence) and internal substepping against an error-per-unit-
// step estimate from the Hessenberg remainder.
Eigen::VectorXd expm_multiply_krylov(const Eigen::SparseMatrix<double>& A,
                                     const Eigen::VectorXd& v, double dt,
                                     const IntegratorConfig& cfg,
                                     StepperStats* stats = nullptr);

// Incremental form used by the adaptive FSP loop: one accepted substep per
// call so the caller can check its error budget between steps.
class KrylovStepper {
 public:
  KrylovStepper(Eigen::SparseMatrix<double> A, const IntegratorConfig& cfg,
                double horizon);
  // advances p in place from t toward t_end; returns the new time
  double step(double t, double t_end, Eigen::VectorXd& p, StepperStats* stats = nullptr);

 private:
  Eigen::SparseMatrix<double> A_;
  IntegratorConfig cfg_;
  double horizon_;
  double tau_suggest_ = 0.0;
};

class RosenbrockWStepper {
 public:
  RosenbrockWStepper(std::function<Eigen::SparseMatrix<double>(double)> A_of_t,
                     const IntegratorConfig& cfg, double horizon);
  double step(double t, double t_end, Eigen::VectorXd& p, StepperStats* stats = nullptr);

 private:
  std::function<Eigen::SparseMatrix<double>(double)> A_of_t_;
  IntegratorConfig cfg_;
  double horizon_;
  double h_suggest_ = 0.0;
};

}  // namespace mfst
