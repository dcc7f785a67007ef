#include "binned_fit.hpp"

#include <cmath>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace emccd::detail {

namespace {

struct ResidualFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const BinModel* model;
  const Eigen::VectorXd* observed;
  const Transform* to_natural;
  Objective objective;
  int n_inputs;

  int inputs() const { return n_inputs; }
  int values() const { return static_cast<int>(observed->size()); }

  int operator()(const Eigen::VectorXd& solver, Eigen::VectorXd& residuals) const {
    Eigen::VectorXd expected(observed->size());
    (*model)((*to_natural)(solver), expected);
    residuals.resize(observed->size());
    for (Eigen::Index i = 0; i < observed->size(); ++i) {
      const double k = (*observed)[i];
      const double m = expected[i];
      if (!std::isfinite(m)) {
        residuals[i] = 1e6;
        continue;
      }
      if (objective == Objective::weighted_least_squares) {
        residuals[i] = (k - m) / std::sqrt(std::max(k, 1.0));
        continue;
      }
      if (m <= 0.0) {
        residuals[i] = k > 0.0 ? 1e6 : 0.0;
        continue;
      }
      const double deviance = k > 0.0 ? 2.0 * (m - k + k * std::log(k / m)) : 2.0 * m;
      residuals[i] = std::copysign(std::sqrt(std::max(deviance, 0.0)), k - m);
    }
    return 0;
  }
};

}  // namespace

BinnedFitResult fit_binned(const BinModel& model, const Eigen::VectorXd& observed,
                           const Eigen::VectorXd& start, const Transform& to_natural,
                           Objective objective, int max_iterations) {
  ResidualFunctor functor{&model, &observed, &to_natural, objective,
                          static_cast<int>(start.size())};
  Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> numeric(functor);
  Eigen::LevenbergMarquardt<decltype(numeric), double> solver(numeric);
  solver.parameters.maxfev = 4 * max_iterations;
  solver.parameters.ftol = 1e-13;
  solver.parameters.xtol = 1e-13;

  Eigen::VectorXd x = start;
  const auto status = solver.minimize(x);

  BinnedFitResult result;
  result.iterations = static_cast<int>(solver.iter);
  result.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                     status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                     result.iterations <= max_iterations && x.allFinite();
  result.params = to_natural(x);

  // Fisher information in natural parameters from a central-difference
  // Jacobian of the expected bin contents.
  const Eigen::Index n_bins = observed.size();
  const Eigen::Index n_par = result.params.size();
  Eigen::VectorXd expected(n_bins);
  model(result.params, expected);
  Eigen::MatrixXd jacobian(n_bins, n_par);
  for (Eigen::Index j = 0; j < n_par; ++j) {
    const double h = 1e-6 * std::max(std::abs(result.params[j]), 1e-9);
    Eigen::VectorXd up = result.params;
    Eigen::VectorXd down = result.params;
    up[j] += h;
    down[j] -= h;
    Eigen::VectorXd e_up(n_bins);
    Eigen::VectorXd e_down(n_bins);
    model(up, e_up);
    model(down, e_down);
    jacobian.col(j) = (e_up - e_down) / (2.0 * h);
  }
  Eigen::VectorXd weights(n_bins);
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < n_bins; ++i) {
    const double variance = objective == Objective::weighted_least_squares
                                ? std::max(observed[i], 1.0)
                                : std::max(expected[i], 1e-300);
    weights[i] = 1.0 / variance;
    const double r = observed[i] - expected[i];
    chi2 += r * r / (objective == Objective::poisson ? std::max(expected[i], 1e-300) : variance);
  }
  const Eigen::MatrixXd fisher = jacobian.transpose() * weights.asDiagonal() * jacobian;
  result.covariance = fisher.completeOrthogonalDecomposition().pseudoInverse();
  result.reduced_chi2 = chi2 / static_cast<double>(std::max<Eigen::Index>(n_bins - n_par, 1));
  return result;
}

}  // namespace emccd::detail
