#include "qfs/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace qfs {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class SearchSpace {
 public:
  SearchSpace(const LinearOperator& op, Index dim, Index capacity)
      : op_(op), v_(dim, capacity), hv_(dim, capacity), t_(capacity, capacity) {}

  Index size() const { return m_; }
  Index capacity() const { return v_.cols(); }
  Index dim() const { return v_.rows(); }

  /// Orthonormalizes w against the space and appends it. Returns false when w
  /// is (numerically) inside the space already.
  bool add(VectorXd w) {
    const double n0 = w.norm();
    if (!(n0 > 0.0) || m_ == capacity()) return false;
    for (int pass = 0; pass < 2 && m_ > 0; ++pass) {
      const VectorXd c = v_.leftCols(m_).transpose() * w;
      w.noalias() -= v_.leftCols(m_) * c;
    }
    const double n = w.norm();
    if (n < 1e-3 * n0 || n == 0.0) return false;
    v_.col(m_) = w / n;
    op_(std::span<const double>(v_.col(m_).data(), dim()), std::span<double>(hv_.col(m_).data(), dim()));
    for (Index i = 0; i <= m_; ++i) {
      const double tim = 0.5 * (v_.col(i).dot(hv_.col(m_)) + hv_.col(i).dot(v_.col(m_)));
      t_(i, m_) = tim;
      t_(m_, i) = tim;
    }
    ++m_;
    return true;
  }

  Eigen::SelfAdjointEigenSolver<MatrixXd> rayleigh_ritz() const {
    return Eigen::SelfAdjointEigenSolver<MatrixXd>(t_.topLeftCorner(m_, m_));
  }

  MatrixXd combine(const MatrixXd& y) const { return v_.leftCols(m_) * y; }
  MatrixXd combine_image(const MatrixXd& y) const { return hv_.leftCols(m_) * y; }

  /// Collapses the space onto the given Ritz vectors (columns of y).
  void restart(const MatrixXd& y, const VectorXd& theta) {
    const Index keep = y.cols();
    const MatrixXd v = combine(y), hv = combine_image(y);
    v_.leftCols(keep) = v;
    hv_.leftCols(keep) = hv;
    t_.topLeftCorner(keep, keep) = theta.head(keep).asDiagonal();
    m_ = keep;
  }

 private:
  const LinearOperator& op_;
  MatrixXd v_, hv_, t_;
  Index m_ = 0;
};

}  // namespace

LowestEigenpairs lowest_eigenpairs(const LinearOperator& op, std::size_t dim_in, int k,
                                   const EigensolverOptions& options,
                                   std::span<const std::vector<double>> guesses) {
  const auto dim = static_cast<Index>(dim_in);
  if (k < 1 || k > dim) throw std::invalid_argument("eigensolver: need 1 <= k <= dim");
  const Index capacity = std::min<Index>(dim, options.max_basis > 0 ? options.max_basis : 48);
  if (capacity < std::min<Index>(dim, 2 * k)) throw std::invalid_argument("eigensolver: basis too small for k");
  const long long max_iterations =
      options.max_iterations > 0 ? options.max_iterations : std::max<long long>(1, 5LL * dim / k);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_vector = [&] {
    VectorXd v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
    return v;
  };

  SearchSpace space(op, dim, capacity);
  for (const auto& g : guesses) {
    if (space.size() >= k) break;
    if (static_cast<Index>(g.size()) == dim) space.add(Eigen::Map<const VectorXd>(g.data(), dim));
  }
  while (space.size() < k) space.add(random_vector());

  LowestEigenpairs out;
  for (long long iter = 0;; ++iter) {
    const auto ritz = space.rayleigh_ritz();
    const MatrixXd y = ritz.eigenvectors().leftCols(k);
    const VectorXd theta = ritz.eigenvalues();
    const MatrixXd x = space.combine(y);
    const MatrixXd r = space.combine_image(y) - x * theta.head(k).asDiagonal();

    std::vector<Index> open;
    out.residuals.assign(k, 0.0);
    for (int j = 0; j < k; ++j) {
      out.residuals[j] = r.col(j).norm();
      if (out.residuals[j] > options.tolerance * std::max(1.0, std::abs(theta[j]))) open.push_back(j);
    }
    out.iterations = static_cast<int>(iter);
    const bool exhausted = space.size() == dim;
    if (open.empty() || exhausted || iter >= max_iterations) {
      out.converged = open.empty() || exhausted;
      out.values.assign(theta.data(), theta.data() + k);
      out.vectors.clear();
      for (int j = 0; j < k; ++j) {
        VectorXd v = x.col(j).normalized();
        out.vectors.emplace_back(v.data(), v.data() + dim);
      }
      if (exhausted) std::fill(out.residuals.begin(), out.residuals.end(), 0.0);
      return out;
    }

    if (capacity < dim && space.size() + static_cast<Index>(open.size()) > capacity) {
      const Index keep = std::min<Index>(space.size(), std::max<Index>(2 * k, capacity / 2));
      space.restart(ritz.eigenvectors().leftCols(keep), theta);
    }
    bool grew = false;
    for (Index j : open) grew = space.add(r.col(j)) || grew;
    while (!grew && space.size() < capacity) grew = space.add(random_vector());
  }
}

}  // namespace qfs
