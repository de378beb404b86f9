#include "tailbound/gaussian.hpp"

#include <cmath>
#include <string>

namespace tailbound {

namespace {

void require_bound_inputs(Eigen::Index d, Eigen::Index k, long n, double r) {
  if (k < 0 || k > d) {
    throw InputError("rank k must lie in [0, " + std::to_string(d) + "], got " + std::to_string(k));
  }
  if (n <= 0) throw InputError("sample size n must be positive");
  if (!(r > 0.0) || !std::isfinite(r)) throw InputError("rate r must be finite and > 0");
}

}  // namespace

GaussianModel::GaussianModel(Eigen::MatrixXd covariance) : covariance_(std::move(covariance)) {
  const Eigen::Index d = covariance_.rows();
  if (d == 0 || covariance_.cols() != d) throw InputError("covariance must be a nonempty square matrix");
  if (d > kMaxGaussianDim) throw InputError("covariance dimension exceeds 2000");
  if (!covariance_.allFinite()) throw InputError("covariance entries must be finite");
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError("covariance must be symmetric within 1e-12");
  }

  auto eig = jacobi_eigen(covariance_);
  if (eig.values.minCoeff() < -1e-10) {
    throw InputError("covariance must be positive semidefinite (eigenvalue " +
                     std::to_string(eig.values.minCoeff()) + ")");
  }
  const double recon =
      (eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose() - covariance_)
          .cwiseAbs()
          .maxCoeff();
  if (recon > 1e-8) throw NumericError("eigendecomposition reconstruction error above 1e-8");

  eigenvalues_ = eig.values.cwiseMax(0.0);
  eigenvectors_ = std::move(eig.vectors);
  sqrt_covariance_ =
      eigenvectors_ * eigenvalues_.cwiseSqrt().asDiagonal() * eigenvectors_.transpose();
}

GaussianModel GaussianModel::from_spectrum(const Eigen::VectorXd& spectrum) {
  return GaussianModel(Eigen::MatrixXd(spectrum.asDiagonal()));
}

double GaussianModel::tail_trace(Eigen::Index k) const {
  return eigenvalues_.tail(dim() - k).sum();
}

double GaussianModel::tail_op(Eigen::Index k) const { return k < dim() ? eigenvalues_(k) : 0.0; }

Eigen::MatrixXd GaussianModel::truncated(Eigen::Index k) const {
  const auto vk = eigenvectors_.leftCols(k);
  return vk * eigenvalues_.head(k).asDiagonal() * vk.transpose();
}

double GaussianModel::quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return std::max(0.0, u.dot(covariance_ * u));
}

double GaussianModel::truncated_quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& u,
                                               Eigen::Index k) const {
  const Eigen::VectorXd coords = eigenvectors_.leftCols(k).transpose() * u;
  return eigenvalues_.head(k).dot(coords.cwiseAbs2());
}

LinearFunctional::LinearFunctional(Eigen::VectorXd direction) : direction_(std::move(direction)) {
  if (!direction_.allFinite()) throw InputError("direction must be finite");
  if (direction_.norm() > 1.0 + 1e-12) throw InputError("direction must satisfy ||u||_2 <= 1");
}

double cgf_norm(const GaussianModel& model, const LinearFunctional& f) {
  if (f.direction().size() != model.dim()) throw InputError("direction dimension mismatch");
  return std::sqrt(model.quadratic_form(f.direction()));
}

CgfOracle gaussian_oracle(const GaussianModel& model, const LinearFunctional& f) {
  return cgf_gaussian(cgf_norm(model, f));
}

GaussianBoundReport gaussian_instance_bound(const GaussianModel& model, const LinearFunctional& f,
                                            Eigen::Index k, long n, double r,
                                            ProjectedTerm projected) {
  require_bound_inputs(model.dim(), k, n, r);
  const double sigma = cgf_norm(model, f);
  const double nd = static_cast<double>(n);

  GaussianBoundReport rep;
  rep.k = k;
  rep.n = n;
  rep.r = r;
  rep.projected_term = projected;
  rep.tail_trace = std::sqrt(model.tail_trace(k) / nd);
  rep.tail_op = std::sqrt(2.0 * r * model.tail_op(k));
  const double proj_scale = projected == ProjectedTerm::Truncated
                                ? std::sqrt(model.truncated_quadratic_form(f.direction(), k))
                                : sigma;
  rep.projected = std::sqrt(static_cast<double>(k) / nd) * proj_scale;
  rep.base = std::sqrt(2.0 * r) * sigma;
  rep.total = rep.tail_trace + rep.tail_op + rep.projected + rep.base;
  rep.probability_level = 1.0 - 2.0 * std::exp(-nd * r);
  return rep;
}

double rank_objective(const GaussianModel& model, Eigen::Index k, long n, double r) {
  require_bound_inputs(model.dim(), k, n, r);
  const double nd = static_cast<double>(n);
  return std::sqrt(model.tail_trace(k) / nd) + std::sqrt(2.0 * r * model.tail_op(k)) +
         std::sqrt(static_cast<double>(k) / nd) * std::sqrt(model.eigenvalues()(0));
}

Eigen::Index optimal_rank(const GaussianModel& model, long n, double r) {
  Eigen::Index best = 0;
  double best_value = rank_objective(model, 0, n, r);
  for (Eigen::Index k = 1; k <= model.dim(); ++k) {
    const double value = rank_objective(model, k, n, r);
    if (value < best_value) {
      best = k;
      best_value = value;
    }
  }
  return best;
}

}  // namespace tailbound
