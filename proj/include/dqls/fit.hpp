#pragma once

#include "dqls/numeric.hpp"

#include <vector>

namespace dqls {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolyFit {
  std::vector<double> coef;  // constant term first
  double r2 = 0.0;
  std::vector<double> std_errors;  // standard errors, same order as coef

  double slope() const { return coef.at(1); }
  double intercept() const { return coef.at(0); }
};

// Ordinary least squares on a polynomial basis in x.
inline PolyFit poly_fit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (x.size() != y.size()) throw FitError("fit: x and y differ in length");
  if (n < 3 || n < degree + 2) throw FitError("fit: need at least " + std::to_string(std::max(3, degree + 2)) + " points");
  RMat X(n, degree + 1);
  RVec Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d <= degree; ++d) X(i, d) = std::pow(x[static_cast<std::size_t>(i)], d);
    Y(i) = y[static_cast<std::size_t>(i)];
  }
  auto qr = X.colPivHouseholderQr();
  if (qr.rank() < degree + 1) throw FitError("fit: degenerate design (repeated regressor values)");
  const RVec c = qr.solve(Y);
  const RVec res = Y - X * c;
  const double ss_res = res.squaredNorm();
  const double ss_tot = (Y.array() - Y.mean()).matrix().squaredNorm();
  PolyFit f;
  f.coef.assign(c.data(), c.data() + c.size());
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  const double dof = double(n - degree - 1);
  const double s2 = dof > 0 ? ss_res / dof : 0.0;
  const RMat cov = s2 * (X.transpose() * X).inverse();
  for (int d = 0; d <= degree; ++d) f.std_errors.push_back(std::sqrt(std::max(0.0, cov(d, d))));
  return f;
}

inline PolyFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) { return poly_fit(x, y, 1); }
inline PolyFit quadratic_fit(const std::vector<double>& x, const std::vector<double>& y) { return poly_fit(x, y, 2); }

}  // namespace dqls
