#include "mhdlag/banded.hpp"

#include <cmath>
#include <sstream>

namespace mhdlag {

Eigen::MatrixXd BandedMatrix::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_ + kl_); ++j) d(i, j) = ab_(i, j - i + kl_);
  return d;
}

BandedLU::BandedLU(BandedMatrix a, double rel_tol) : a_(std::move(a)), piv_(a_.n_) {
  const int n = a_.n_, kl = a_.kl_, span = a_.kl_ + a_.ku_;
  const double scale = a_.ab_.cwiseAbs().maxCoeff();
  auto at = [&](int i, int j) -> double& { return a_.ab_(i, j - i + kl); };
  for (int j = 0; j < n; ++j) {
    const int last = std::min(n - 1, j + kl);
    int p = j;
    for (int r = j + 1; r <= last; ++r)
      if (std::abs(at(r, j)) > std::abs(at(p, j))) p = r;
    piv_[j] = p;
    if (!(std::abs(at(p, j)) > rel_tol * scale)) {
      std::ostringstream os;
      os << "singular banded system: pivot " << at(p, j) << " in column " << j << " of " << n;
      throw SingularSystemError(os.str());
    }
    const int right = std::min(n - 1, j + span);
    if (p != j)
      for (int c = j; c <= right; ++c) std::swap(at(j, c), at(p, c));
    const double pivot = at(j, j);
    for (int r = j + 1; r <= last; ++r) {
      const double m = at(r, j) / pivot;
      at(r, j) = m;
      if (m == 0.0) continue;
      for (int c = j + 1; c <= right; ++c) at(r, c) -= m * at(j, c);
    }
  }
}

}  // namespace mhdlag
