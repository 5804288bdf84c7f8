#include "mfstmcmc/integrator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include "mfstmcmc/errors.hpp"

namespace mfst {

namespace {

// Pade order 13 with scaling and squaring, for the small projected
// exponentials inside the Krylov stepper. Kept separate from the Eigen-backed
// oracle below so the two exponential routes stay independent.
Eigen::MatrixXd pade13_expm(const Eigen::MatrixXd& A) {
  static const double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;
  const Eigen::Index n = A.rows();
  double norm = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) norm = std::max(norm, A.col(j).cwiseAbs().sum());
  int s = 0;
  if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  Eigen::MatrixXd As = A / std::pow(2.0, s);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A2 = As * As;
  Eigen::MatrixXd A4 = A2 * A2;
  Eigen::MatrixXd A6 = A2 * A4;
  Eigen::MatrixXd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
            b[3] * A2 + b[1] * I);
  Eigen::MatrixXd V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                      b[4] * A4 + b[2] * A2 + b[0] * I;
  Eigen::MatrixXd F = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < s; ++k) F = F * F;
  return F;
}

}  // namespace

Eigen::MatrixXd dense_reference_expm(const Eigen::MatrixXd& A, double dt) {
  if (A.rows() != A.cols()) throw IntegratorError("dense_reference_expm: square matrix required");
  if (A.rows() > 2000) throw IntegratorError("dense_reference_expm: oracle capped at 2000 states");
  Eigen::MatrixXd B = dt * A;
  return B.exp();
}

namespace {

struct KrylovBasis {
  Eigen::MatrixXd V;  // n x (m+1)
  Eigen::MatrixXd H;  // (m+1) x m
  int m = 0;
  bool invariant = false;  // happy breakdown: Krylov space closed under A
};

// Arnoldi with incomplete orthogonalization: each new vector is orthogonalized
// against the previous two only. The recurrence A V_m = V_{m+1} H still holds,
// which is all the exponential approximation and its remainder estimate need.
KrylovBasis build_iop_basis(const Eigen::SparseMatrix<double>& A,
                            const Eigen::VectorXd& v0, int m_max) {
  const Eigen::Index n = A.rows();
  const int m_cap = std::min<int>(m_max, static_cast<int>(n));
  KrylovBasis kb;
  kb.V.resize(n, m_cap + 1);
  kb.H.setZero(m_cap + 1, m_cap);
  kb.V.col(0) = v0;
  for (int j = 0; j < m_cap; ++j) {
    Eigen::VectorXd w = A * kb.V.col(j);
    double wnorm0 = w.norm();
    for (int i = std::max(0, j - 1); i <= j; ++i) {
      double hij = kb.V.col(i).dot(w);
      kb.H(i, j) = hij;
      w -= hij * kb.V.col(i);
    }
    double hnext = w.norm();
    kb.H(j + 1, j) = hnext;
    kb.m = j + 1;
    if (hnext <= 1e-12 * wnorm0 + 1e-300) {
      kb.invariant = true;
      return kb;
    }
    kb.V.col(j + 1) = w / hnext;
  }
  return kb;
}

}  // namespace

KrylovStepper::KrylovStepper(Eigen::SparseMatrix<double> A, const IntegratorConfig& cfg,
                             double horizon)
    : A_(std::move(A)), cfg_(cfg), horizon_(horizon > 0 ? horizon : 1.0) {}

double KrylovStepper::step(double t, double t_end, Eigen::VectorXd& p,
                           StepperStats* stats) {
  double remaining = t_end - t;
  if (remaining <= 0.0) return t;
  double beta = p.norm();
  if (beta == 0.0) return t_end;

  KrylovBasis kb = build_iop_basis(A_, p / beta, cfg_.krylov_basis);
  const int m = kb.m;

  if (kb.invariant) {
    // projection is exact; take everything that is left
    double tau = std::min(remaining, cfg_.max_step);
    Eigen::MatrixXd F = pade13_expm(tau * kb.H.topLeftCorner(m, m));
    p = beta * (kb.V.leftCols(m) * F.col(0));
    if (stats) ++stats->steps;
    tau_suggest_ = tau;
    return t + tau;
  }

  // remainder terms via the augmented Hessenberg trick
  Eigen::MatrixXd Haug = Eigen::MatrixXd::Zero(m + 2, m + 2);
  Haug.topLeftCorner(m, m) = kb.H.topLeftCorner(m, m);
  Haug(m, m - 1) = kb.H(m, m - 1);
  Haug(m + 1, m) = 1.0;
  double avnorm = (A_ * kb.V.col(m)).norm();

  if (tau_suggest_ <= 0.0) {
    double anorm = 0.0;
    for (int c = 0; c < A_.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, c); it; ++it)
        if (it.row() == it.col()) anorm = std::max(anorm, std::abs(it.value()));
    tau_suggest_ = anorm > 0.0 ? 1.0 / anorm : remaining;
  }
  double tau = std::min({tau_suggest_, remaining, cfg_.max_step});

  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::MatrixXd F = pade13_expm(tau * Haug);
    double err1 = beta * std::abs(F(m, 0));
    double err2 = beta * std::abs(F(m + 1, 0)) * avnorm;
    double err_loc;
    if (err1 > 10.0 * err2)
      err_loc = err2;
    else if (err1 > err2)
      err_loc = err1 * err2 / (err1 - err2);
    else
      err_loc = err1;
    double tol_step = std::max(cfg_.abs_tol, cfg_.rel_tol * beta) * (tau / horizon_);
    if (err_loc <= tol_step || cfg_.fixed_step) {
      p = beta * (kb.V.leftCols(m) * F.col(0).head(m));
      if (stats) ++stats->steps;
      double grow = 0.9 * std::pow(tol_step / std::max(err_loc, 1e-300), 1.0 / m);
      tau_suggest_ = tau * std::clamp(grow, 0.2, 5.0);
      return t + tau;
    }
    if (stats) ++stats->rejections;
    double shrink = 0.9 * std::pow(tol_step / err_loc, 1.0 / m);
    tau *= std::clamp(shrink, 0.1, 0.9);
    if (tau < 1e-14 * horizon_)
      throw IntegratorError("krylov step size underflow");
  }
  throw IntegratorError("krylov step rejected 60 times in a row");
}

Eigen::VectorXd expm_multiply_krylov(const Eigen::SparseMatrix<double>& A,
                                     const Eigen::VectorXd& v, double dt,
                                     const IntegratorConfig& cfg, StepperStats* stats) {
  if (A.rows() != A.cols() || A.rows() != v.size())
    throw IntegratorError("expm_multiply_krylov: dimension mismatch");
  if (dt == 0.0) return v;
  if (dt < 0.0) throw IntegratorError("expm_multiply_krylov: negative dt");
  KrylovStepper stepper(A, cfg, dt);
  Eigen::VectorXd p = v;
  double t = 0.0;
  while (t < dt) t = stepper.step(t, dt, p, stats);
  return p;
}

namespace {

// ROS34PW2 (four-stage, order 3(2), L-stable W-method)
struct Ros34pw2 {
  static constexpr double gamma = 4.3586652150845900e-01;
  static constexpr double a[4][4] = {
      {0, 0, 0, 0},
      {8.7173304301691801e-01, 0, 0, 0},
      {8.4457060015369423e-01, -1.1299064236484185e-01, 0, 0},
      {0, 0, 1.0, 0}};
  static constexpr double g[4][4] = {
      {gamma, 0, 0, 0},
      {-8.7173304301691801e-01, gamma, 0, 0},
      {-9.0338057013044082e-01, 5.4180672388095326e-02, gamma, 0},
      {2.4212380706095346e-01, -1.2232505839045147e+00, 5.4526025533510214e-01, gamma}};
  static constexpr double b[4] = {2.4212380706095346e-01, -1.2232505839045147e+00,
                                  1.5452602553351020e+00, 4.3586652150845900e-01};
  static constexpr double bhat[4] = {3.7810903145819369e-01, -9.6042292212423178e-02,
                                     5.0e-01, 2.1793326075422950e-01};
};

}  // namespace

RosenbrockWStepper::RosenbrockWStepper(
    std::function<Eigen::SparseMatrix<double>(double)> A_of_t,
    const IntegratorConfig& cfg, double horizon)
    : A_of_t_(std::move(A_of_t)), cfg_(cfg), horizon_(horizon > 0 ? horizon : 1.0) {}

double RosenbrockWStepper::step(double t, double t_end, Eigen::VectorXd& p,
                                StepperStats* stats) {
  using R = Ros34pw2;
  double remaining = t_end - t;
  if (remaining <= 0.0) return t;
  if (h_suggest_ <= 0.0) h_suggest_ = std::min(remaining, horizon_ / 100.0);
  double h = std::min({h_suggest_, remaining, cfg_.max_step});
  if (cfg_.fixed_step) h = std::min(cfg_.max_step, remaining);

  const Eigen::Index n = p.size();
  Eigen::SparseMatrix<double> A0 = A_of_t_(t);

  // f_t(t, y) = dA/dt * y, central difference on the generator
  double dfd = 6e-6 * std::max(1.0, std::abs(t));
  Eigen::SparseMatrix<double> Adot = A_of_t_(t + dfd) - A_of_t_(t - dfd);
  Eigen::VectorXd ft = (Adot * p) / (2.0 * dfd);

  double alpha[4], gsum[4];
  for (int i = 0; i < 4; ++i) {
    alpha[i] = 0.0;
    gsum[i] = 0.0;
    for (int j = 0; j < i; ++j) alpha[i] += R::a[i][j];
    for (int j = 0; j <= i; ++j) gsum[i] += R::g[i][j];
  }

  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::SparseMatrix<double> I(n, n);
    I.setIdentity();
    Eigen::SparseMatrix<double> W = I - (h * R::gamma) * A0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(W);
    if (lu.info() != Eigen::Success)
      throw IntegratorError("rosenbrock-w: shifted solve factorization failed");

    Eigen::MatrixXd k(n, 4);
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd ui = p;
      for (int j = 0; j < i; ++j) ui += R::a[i][j] * k.col(j);
      Eigen::VectorXd fi =
          (alpha[i] == 0.0 && i == 0) ? Eigen::VectorXd(A0 * ui) : Eigen::VectorXd(A_of_t_(t + alpha[i] * h) * ui);
      Eigen::VectorXd gk = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < i; ++j) gk += R::g[i][j] * k.col(j);
      Eigen::VectorXd rhs = h * fi + h * (A0 * gk) + (gsum[i] * h * h) * ft;
      k.col(i) = lu.solve(rhs);
    }

    Eigen::VectorXd y1 = p;
    Eigen::VectorXd errv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < 4; ++i) {
      y1 += R::b[i] * k.col(i);
      errv += (R::b[i] - R::bhat[i]) * k.col(i);
    }

    if (cfg_.fixed_step) {
      p = y1;
      if (stats) ++stats->steps;
      return t + h;
    }

    double err = 0.0;
    for (Eigen::Index q = 0; q < n; ++q) {
      double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(p[q]), std::abs(y1[q]));
      double e = errv[q] / sc;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(n));

    if (err <= 1.0) {
      p = y1;
      if (stats) ++stats->steps;
      h_suggest_ = h * std::clamp(0.9 * std::pow(std::max(err, 1e-12), -1.0 / 3.0), 0.2, 5.0);
      return t + h;
    }
    if (stats) ++stats->rejections;
    h *= std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 0.9);
    if (h < 1e-14 * horizon_) throw IntegratorError("rosenbrock-w step size underflow");
  }
  throw IntegratorError("rosenbrock-w step rejected 60 times in a row");
}

}  // namespace mfst
