#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "tabser/dataset.hpp"

namespace tabser {

/// One-hot expansion of categorical columns plus z-scored numerics. Missing
/// values leave a one-hot group all zero and a numeric at the column mean.
struct DesignMatrix {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;  // n_rows x n_features
};

DesignMatrix build_design_matrix(const Dataset& ds, bool standardize_numerics = true);

struct LogisticFit {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  int iterations = 0;
};

/// Mean logistic loss plus (l2/2)*||w||^2; the intercept is unpenalized.
/// Targets may be fractional (probability-weighted fitting).
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, double intercept, double l2);

/// Gradient with respect to (weights, intercept); the intercept component is
/// last.
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& weights, double intercept, double l2);

/// Damped Newton to gradient norm 1e-8, at most 10,000 iterations.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                         bool fit_intercept = true);

enum class SurrogateTarget { hard_label, probability };

struct SurrogateOptions {
  int folds = 4;
  std::uint64_t fold_seed = 0;
  SurrogateTarget target = SurrogateTarget::hard_label;
  bool intercept = true;
  bool standardize = true;
};

struct SurrogateResult {
  std::vector<std::string> feature_names;
  std::vector<double> weights;      // per feature
  std::vector<std::size_t> ranks;   // 1 = highest weight
  int folds = 0;
  double chosen_c = 0.0;            // inverse regularization strength
  double intercept = 0.0;
};

/// Inverse-regularization grid searched by cross-validated log-loss.
const std::vector<double>& surrogate_c_grid();

/// L2 logistic surrogate for the model's zero-shot predictions: C picked by
/// k-fold CV on log-loss, refit on all rows, features ranked by weight.
SurrogateResult surrogate_importance(const Dataset& ds, const std::vector<double>& zero_shot_probs,
                                     const SurrogateOptions& options = {});

struct RelativeRisk {
  double rr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool ci_defined = false;  // false when a = 0 or c = 0 (Katz CI undefined)
};

/// rr = (a/(a+b)) / (c/(c+d)) with the Katz log-method 95% CI.
RelativeRisk relative_risk(long long exposed_pos, long long exposed_neg, long long unexposed_pos,
                           long long unexposed_neg);

}  // namespace tabser
