#include "support.hpp"
#include "tailbound/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>

using namespace tailbound;

namespace {

Eigen::VectorXd poly_spectrum(int d, double exponent) {
  Eigen::VectorXd s(d);
  for (int j = 0; j < d; ++j) s(j) = std::pow(j + 1.0, -exponent);
  return s;
}

}  // namespace

TEST_SUITE("gaussian") {
  TEST_CASE("Jacobi agrees with Eigen's self-adjoint solver") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int d : {1, 2, 5, 17, 40}) {
      Eigen::MatrixXd a(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = g(rng);
      a = (a + a.transpose()).eval();
      const auto mine = jacobi_eigen(a);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
      const Eigen::VectorXd expected = ref.eigenvalues().reverse();
      CHECK((mine.values - expected).cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, a.norm()));
      const Eigen::MatrixXd rebuilt = mine.vectors * mine.values.asDiagonal() * mine.vectors.transpose();
      CHECK((rebuilt - a).cwiseAbs().maxCoeff() < 1e-11 * std::max(1.0, a.norm()));
      CHECK((mine.vectors.transpose() * mine.vectors - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
    }
    // Single precision instantiation.
    Eigen::Matrix3f f;
    f << 2, 1, 0, 1, 2, 0, 0, 0, 1;
    const auto sf = jacobi_eigen(f, 1e-6f);
    CHECK(sf.values(0) == doctest::Approx(3.0f).epsilon(1e-5));
  }

  TEST_CASE("model validation") {
    Eigen::Matrix2d asym;
    asym << 1.0, 0.5, 0.4, 1.0;
    CHECK_THROWS_AS(GaussianModel{asym}, InputError);
    Eigen::Matrix2d neg;
    neg << 1.0, 0.0, 0.0, -1e-3;
    CHECK_THROWS_AS(GaussianModel{neg}, InputError);
    neg(1, 1) = -1e-12;
    CHECK(GaussianModel(neg).eigenvalues()(1) == 0.0);
    CHECK_THROWS_AS(LinearFunctional(Eigen::Vector2d(1.0, 1.0)), InputError);
  }

  TEST_CASE("CGF norm and consistency with T_r") {
    const auto id = GaussianModel(Eigen::Matrix2d::Identity());
    CHECK(cgf_norm(id, LinearFunctional(Eigen::Vector2d(1.0, 0.0))) == doctest::Approx(1.0));
    const auto diag = GaussianModel::from_spectrum(Eigen::Vector2d(4.0, 1.0));
    CHECK(cgf_norm(diag, LinearFunctional(Eigen::Vector2d(1.0, 0.0))) == doctest::Approx(2.0));
    CHECK(cgf_norm(diag, LinearFunctional(Eigen::Vector2d::Zero())) == 0.0);

    Eigen::Matrix3d s;
    s << 2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5;
    const GaussianModel m(s);
    const LinearFunctional u(Eigen::Vector3d(0.6, -0.48, 0.64));
    for (double r : {0.01, 0.3, 2.0}) {
      CHECK(std::abs(rate_bound_T(gaussian_oracle(m, u), r) - std::sqrt(2.0 * r) * cgf_norm(m, u)) < 1e-9);
    }
  }

  TEST_CASE("spectral tails") {
    Eigen::Matrix3d s;
    s << 2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5;
    const GaussianModel m(s);
    const Eigen::VectorXd ev = m.eigenvalues();
    for (int k = 0; k <= 3; ++k) {
      CHECK(m.tail_trace(k) == doctest::Approx(ev.tail(3 - k).sum()).epsilon(1e-10));
      const double op = (s - m.truncated(k)).jacobiSvd().singularValues()(0);
      CHECK(std::abs(m.tail_op(k) - op) < 1e-10);
    }
  }

  TEST_CASE("bound terms against independent arithmetic (d = 20)") {
    const auto model = GaussianModel::from_spectrum(poly_spectrum(20, 2.0));
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(20);
    e1(0) = 1.0;
    const auto rep = gaussian_instance_bound(model, LinearFunctional(e1), 3, 100, 0.02);
    double tail = 0.0;
    for (int j = 4; j <= 20; ++j) tail += 1.0 / (j * j);
    CHECK(std::abs(rep.tail_trace - std::sqrt(tail / 100.0)) < 1e-12);
    CHECK(std::abs(rep.tail_op - std::sqrt(2.0 * 0.02 / 16.0)) < 1e-12);
    CHECK(std::abs(rep.projected - std::sqrt(3.0 / 100.0)) < 1e-12);
    CHECK(std::abs(rep.base - std::sqrt(0.04)) < 1e-12);
    CHECK(std::abs(rep.total - (rep.tail_trace + rep.tail_op + rep.projected + rep.base)) < 1e-15);
    CHECK(rep.probability_level == doctest::Approx(1.0 - 2.0 * std::exp(-2.0)));
  }

  TEST_CASE("bound at k = 0 and k = d, monotone terms") {
    const auto model = GaussianModel::from_spectrum(poly_spectrum(6, 1.0));
    Eigen::VectorXd u = Eigen::VectorXd::Constant(6, 1.0 / std::sqrt(6.0));
    const LinearFunctional f(u);
    const double q = model.quadratic_form(u);
    const auto full = gaussian_instance_bound(model, f, 6, 50, 0.1);
    CHECK(full.tail_trace == 0.0);
    CHECK(full.tail_op == 0.0);
    CHECK(full.total == doctest::Approx((std::sqrt(0.2) + std::sqrt(6.0 / 50.0)) * std::sqrt(q)));
    const auto none = gaussian_instance_bound(model, f, 0, 50, 0.1);
    CHECK(none.projected == 0.0);
    CHECK(none.total == doctest::Approx(std::sqrt(model.eigenvalues().sum() / 50.0) + std::sqrt(0.2) +
                                        std::sqrt(0.2) * std::sqrt(q)));
    for (int k = 1; k <= 6; ++k) {
      const auto a = gaussian_instance_bound(model, f, k - 1, 50, 0.1);
      const auto b = gaussian_instance_bound(model, f, k, 50, 0.1);
      CHECK(b.tail_trace <= a.tail_trace);
      CHECK(b.tail_op <= a.tail_op);
      CHECK(b.projected >= a.projected);
    }
    const auto loose = gaussian_instance_bound(model, f, 2, 50, 0.1, ProjectedTerm::Full);
    CHECK(loose.projected == doctest::Approx(std::sqrt(2.0 / 50.0) * std::sqrt(q)));
    CHECK_THROWS_AS(gaussian_instance_bound(model, f, 7, 50, 0.1), InputError);
    CHECK_THROWS_AS(gaussian_instance_bound(model, f, 1, 0, 0.1), InputError);
    CHECK_THROWS_AS(gaussian_instance_bound(model, f, 1, 50, 0.0), InputError);
  }

  TEST_CASE("optimal rank equals an exhaustive scan") {
    auto scan = [](const GaussianModel& m, long n, double r) {
      const Eigen::VectorXd ev = m.eigenvalues();
      const Eigen::Index d = ev.size();
      Eigen::Index best = 0;
      double best_value = INFINITY;
      for (Eigen::Index k = 0; k <= d; ++k) {
        const double next = k < d ? ev(k) : 0.0;
        const double v = std::sqrt(ev.tail(d - k).sum() / n) + std::sqrt(2.0 * r * next) +
                         std::sqrt(static_cast<double>(k) / n) * std::sqrt(ev(0));
        if (v < best_value) best_value = v, best = k;
      }
      return best;
    };
    const auto quartic = GaussianModel::from_spectrum(poly_spectrum(50, 4.0));
    CHECK(optimal_rank(quartic, 200, 0.05) == scan(quartic, 200, 0.05));
    const auto poly2 = GaussianModel::from_spectrum(poly_spectrum(50, 2.0));
    CHECK(optimal_rank(poly2, 100, 0.02) == scan(poly2, 100, 0.02));
    for (double lam : {0.1, 1.0, 5.0}) {
      const auto one = GaussianModel::from_spectrum(Eigen::VectorXd::Constant(1, lam));
      CHECK(optimal_rank(one, 10, 0.3) == scan(one, 10, 0.3));
    }
    // Flat spectrum: the scan, not a fixed answer, is the oracle here.
    const auto flat = GaussianModel(Eigen::MatrixXd::Identity(8, 8));
    CHECK(optimal_rank(flat, 100, 0.05) == scan(flat, 100, 0.05));
  }
}
