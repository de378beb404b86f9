#pragma once

#include "tailbound/cgf.hpp"
#include "tailbound/numeric.hpp"

#include <Eigen/Core>
#include <Eigen/Jacobi>

#include <algorithm>
#include <numeric>
#include <vector>

namespace tailbound {

template <typename Scalar>
struct SymmetricEigen {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
  int sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps until the
// off-diagonal Frobenius norm is at most rel_tol * ||A||_F.
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& input,
                                                      typename Derived::Scalar rel_tol = 1e-13,
                                                      int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix a = input;
  const Eigen::Index d = a.rows();
  Matrix v = Matrix::Identity(d, d);

  const Scalar target = rel_tol * a.norm();
  auto off_norm = [&a]() {
    return std::sqrt(Scalar(2)) * a.template triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm();
  };

  SymmetricEigen<Scalar> out;
  while (off_norm() > target) {
    if (out.sweeps++ >= max_sweeps) throw NumericError("Jacobi eigensolver did not converge");
    for (Eigen::Index p = 0; p < d; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        if (a(p, q) == Scalar(0)) continue;
        Eigen::JacobiRotation<Scalar> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = Scalar(0);
        v.applyOnTheRight(p, q, rot);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&a](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

inline constexpr Eigen::Index kMaxGaussianDim = 2000;

// Normal(0, Sigma) with its spectral decomposition computed once.
class GaussianModel {
 public:
  explicit GaussianModel(Eigen::MatrixXd covariance);

  // Diagonal covariance with the given spectrum.
  static GaussianModel from_spectrum(const Eigen::VectorXd& spectrum);

  Eigen::Index dim() const { return covariance_.rows(); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::MatrixXd& sqrt_covariance() const { return sqrt_covariance_; }

  // tr(Sigma - Sigma_k) and ||Sigma - Sigma_k||_op.
  double tail_trace(Eigen::Index k) const;
  double tail_op(Eigen::Index k) const;
  Eigen::MatrixXd truncated(Eigen::Index k) const;

  double quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  // u^T Sigma_k u.
  double truncated_quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  Eigen::Index k) const;

 private:
  Eigen::MatrixXd covariance_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd sqrt_covariance_;
};

// x -> <u, x> with ||u||_2 <= 1.
class LinearFunctional {
 public:
  explicit LinearFunctional(Eigen::VectorXd direction);
  const Eigen::VectorXd& direction() const { return direction_; }

 private:
  Eigen::VectorXd direction_;
};

// sup_lambda sqrt(2 log E e^{lambda <u,X>}) / |lambda| = (u^T Sigma u)^{1/2}.
double cgf_norm(const GaussianModel& model, const LinearFunctional& f);

// Analytic CGF oracle of <u, X>.
CgfOracle gaussian_oracle(const GaussianModel& model, const LinearFunctional& f);

enum class ProjectedTerm {
  Truncated,  // sqrt(k/n) (u^T Sigma_k u)^{1/2}
  Full,       // sqrt(k/n) (u^T Sigma u)^{1/2}
};

struct GaussianBoundReport {
  Eigen::Index k = 0;
  long n = 0;
  double r = 0.0;
  double tail_trace = 0.0;
  double tail_op = 0.0;
  double projected = 0.0;
  double base = 0.0;
  double total = 0.0;
  double probability_level = 0.0;  // 1 - 2 e^{-nr}
  ProjectedTerm projected_term = ProjectedTerm::Truncated;
};

// Rank-k instance bound on E_n <u, X>.
GaussianBoundReport gaussian_instance_bound(const GaussianModel& model, const LinearFunctional& f,
                                            Eigen::Index k, long n, double r,
                                            ProjectedTerm projected = ProjectedTerm::Truncated);

// Direction-free part of the bound as a function of k.
double rank_objective(const GaussianModel& model, Eigen::Index k, long n, double r);

// argmin_k rank_objective over {0, ..., d}, ties to the smaller k.
Eigen::Index optimal_rank(const GaussianModel& model, long n, double r);

}  // namespace tailbound
