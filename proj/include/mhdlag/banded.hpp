#pragma once

// Banded LU with partial pivoting, for the small per-wavenumber systems.

#include <Eigen/Core>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mhdlag {

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square matrix with kl sub- and ku super-diagonals. Row i stores columns
/// [i - kl, i + ku + kl]; the extra kl columns absorb pivoting fill-in.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku), ab_(Eigen::MatrixXd::Zero(n, 2 * kl + ku + 1)) {}

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  double& at(int i, int j) {
    check(i, j);
    return ab_(i, j - i + kl_);
  }
  double at(int i, int j) const {
    check(i, j);
    return ab_(i, j - i + kl_);
  }
  /// a(i, j) += value
  void add(int i, int j, double value) { at(i, j) += value; }

  Eigen::MatrixXd dense() const;

 private:
  friend class BandedLU;
  void check(int i, int j) const {
    if (i < 0 || i >= n_ || j < i - kl_ || j > i + ku_ + kl_ || j < 0 || j >= n_)
      throw std::out_of_range("banded entry outside the stored band");
  }
  int n_, kl_, ku_;
  Eigen::MatrixXd ab_;
};

class BandedLU {
 public:
  BandedLU() = default;
  /// Factors in place. Throws SingularSystemError when a pivot is below
  /// `rel_tol` times the largest entry of the matrix.
  explicit BandedLU(BandedMatrix a, double rel_tol = 1e-13);

  int size() const { return a_.size(); }

  template <typename Scalar>
  void solve_in_place(Scalar* b) const;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = b;
    solve_in_place(x.data());
    return x;
  }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const {
    Eigen::VectorXcd x = b;
    solve_in_place(x.data());
    return x;
  }

 private:
  BandedMatrix a_{0, 0, 0};
  std::vector<int> piv_;
};

template <typename Scalar>
void BandedLU::solve_in_place(Scalar* b) const {
  const int n = a_.n_, kl = a_.kl_, span = a_.kl_ + a_.ku_;
  for (int j = 0; j < n; ++j) {
    if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
    const int last = std::min(n - 1, j + kl);
    for (int r = j + 1; r <= last; ++r) b[r] -= a_.ab_(r, j - r + kl) * b[j];
  }
  for (int i = n - 1; i >= 0; --i) {
    Scalar s = b[i];
    const int last = std::min(n - 1, i + span);
    for (int c = i + 1; c <= last; ++c) s -= a_.ab_(i, c - i + kl) * b[c];
    b[i] = s / a_.ab_(i, kl);
  }
}

}  // namespace mhdlag
