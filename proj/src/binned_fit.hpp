#pragma once

#include <Eigen/Dense>
#include <functional>

// Binned maximum-likelihood / weighted least-squares fitting on top of
// Eigen's Levenberg-Marquardt solver. Internal to the estimators.

namespace emccd::detail {

enum class Objective {
  /// chi^2 with variance max(observed, 1) per bin.
  weighted_least_squares,
  /// Poisson deviance (maximum likelihood).
  poisson,
};

/// Maps natural parameters to expected bin contents.
using BinModel = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& expected)>;
/// Maps solver coordinates to natural parameters (e.g. exp for positive ones).
using Transform = std::function<Eigen::VectorXd(const Eigen::VectorXd& solver)>;

struct BinnedFitResult {
  Eigen::VectorXd params;      ///< natural parameters
  Eigen::MatrixXd covariance;  ///< inverse Fisher information in natural parameters
  double reduced_chi2 = 0.0;   ///< Pearson statistic over (bins - params)
  int iterations = 0;
  bool converged = false;
};

BinnedFitResult fit_binned(const BinModel& model, const Eigen::VectorXd& observed,
                           const Eigen::VectorXd& start, const Transform& to_natural,
                           Objective objective, int max_iterations = 200);

}  // namespace emccd::detail
