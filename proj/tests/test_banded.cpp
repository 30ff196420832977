#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhdlag/banded.hpp"

#include <Eigen/Dense>

#include <random>

using namespace mhdlag;

TEST_CASE("banded LU agrees with dense partial-pivot LU") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int kl : {1, 3, 5})
    for (int ku : {0, 2, 6}) {
      const int n = 40;
      BandedMatrix a(n, kl, ku);
      for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) a.at(i, j) = u(rng);
      const Eigen::MatrixXd d = a.dense();
      Eigen::VectorXd b(n);
      for (auto& x : b) x = u(rng);
      const Eigen::VectorXd ref = d.partialPivLu().solve(b);
      const BandedLU lu(a);
      const Eigen::VectorXd x = lu.solve(b);
      // Random bands can be badly conditioned; compare backward errors.
      const double scale = d.norm();
      CHECK((d * x - b).norm() <= 1e-13 * scale * x.norm());
      CHECK((d * ref - b).norm() <= 1e-13 * scale * ref.norm());
      Eigen::VectorXcd bc = b.cast<std::complex<double>>() * std::complex<double>(0.5, -2.0);
      const Eigen::VectorXcd xc = lu.solve(bc);
      CHECK((d.cast<std::complex<double>>() * xc - bc).norm() <= 1e-13 * scale * xc.norm());
    }
}

TEST_CASE("a zero leading entry needs pivoting") {
  BandedMatrix a(3, 1, 1);
  a.at(0, 0) = 0.0;
  a.at(0, 1) = 1.0;
  a.at(1, 0) = 2.0;
  a.at(1, 1) = 1.0;
  a.at(1, 2) = 1.0;
  a.at(2, 1) = 1.0;
  a.at(2, 2) = 3.0;
  const Eigen::VectorXd x = BandedLU(a).solve(Eigen::VectorXd(Eigen::Vector3d(1, 2, 3)));
  CHECK((a.dense() * x - Eigen::Vector3d(1, 2, 3)).norm() < 1e-14);
}

TEST_CASE("singular systems are reported") {
  BandedMatrix a(3, 1, 1);
  a.at(0, 0) = 1.0;
  a.at(1, 1) = 1.0;
  CHECK_THROWS_AS(BandedLU{a}, SingularSystemError);
  CHECK_THROWS_AS(a.at(2, 0), std::out_of_range);
}
