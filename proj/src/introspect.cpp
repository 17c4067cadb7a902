#include "tabser/introspect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "tabser/errors.hpp"
#include "tabser/rng.hpp"

namespace tabser {

namespace {

double softplus(double z) {
  if (z > 0) {
    return z + std::log1p(std::exp(-z));
  }
  return std::log1p(std::exp(z));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

DesignMatrix build_design_matrix(const Dataset& ds, bool standardize_numerics) {
  DesignMatrix design;
  const std::size_t n = ds.n_rows();

  struct ColumnPlan {
    std::size_t column;
    bool numeric;
    std::vector<std::string> categories;  // categorical only
    double mean = 0.0;
    double sd = 1.0;
  };
  std::vector<ColumnPlan> plans;

  for (std::size_t c = 0; c < ds.n_cols(); ++c) {
    const auto& col = ds.columns[c];
    ColumnPlan plan;
    plan.column = c;
    plan.numeric = col.kind == ColumnKind::numeric;
    if (plan.numeric) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& row : ds.rows) {
        if (row[c].is_numeric()) {
          sum += row[c].num();
          ++count;
        }
      }
      plan.mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
      double ss = 0.0;
      for (const auto& row : ds.rows) {
        if (row[c].is_numeric()) {
          ss += (row[c].num() - plan.mean) * (row[c].num() - plan.mean);
        }
      }
      plan.sd = count > 1 ? std::sqrt(ss / static_cast<double>(count)) : 0.0;
      design.feature_names.push_back(col.raw_name);
    } else {
      std::set<std::string> observed;
      for (const auto& row : ds.rows) {
        if (row[c].is_categorical()) observed.insert(row[c].cat());
      }
      plan.categories.assign(observed.begin(), observed.end());
      for (const auto& token : plan.categories) {
        design.feature_names.push_back(col.raw_name + "_" + token);
      }
    }
    plans.push_back(std::move(plan));
  }

  design.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(design.feature_names.size()));
  Eigen::Index feature = 0;
  for (const auto& plan : plans) {
    if (plan.numeric) {
      for (std::size_t r = 0; r < n; ++r) {
        const auto& value = ds.rows[r][plan.column];
        if (!value.is_numeric()) continue;  // missing sits at the column mean
        double x = value.num();
        if (standardize_numerics) {
          x = plan.sd > 0 ? (x - plan.mean) / plan.sd : 0.0;
        }
        design.values(static_cast<Eigen::Index>(r), feature) = x;
      }
      ++feature;
    } else {
      for (std::size_t r = 0; r < n; ++r) {
        const auto& value = ds.rows[r][plan.column];
        if (!value.is_categorical()) continue;
        const auto it = std::lower_bound(plan.categories.begin(), plan.categories.end(), value.cat());
        const auto offset = static_cast<Eigen::Index>(it - plan.categories.begin());
        design.values(static_cast<Eigen::Index>(r), feature + offset) = 1.0;
      }
      feature += static_cast<Eigen::Index>(plan.categories.size());
    }
  }
  return design;
}

double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, double intercept, double l2) {
  const Eigen::VectorXd z = (X * weights).array() + intercept;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z[i]) - y[i] * z[i];
  }
  loss /= static_cast<double>(z.size());
  return loss + 0.5 * l2 * weights.squaredNorm();
}

Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& weights, double intercept, double l2) {
  const Eigen::VectorXd z = (X * weights).array() + intercept;
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    residual[i] = sigmoid(z[i]) - y[i];
  }
  const double n = static_cast<double>(z.size());
  Eigen::VectorXd grad(weights.size() + 1);
  grad.head(weights.size()) = X.transpose() * residual / n + l2 * weights;
  grad[weights.size()] = residual.sum() / n;
  return grad;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2,
                         bool fit_intercept) {
  if (l2 <= 0) {
    throw DataError(ErrorKind::parse_error, "l2 strength must be positive");
  }
  if (X.rows() != y.size() || X.rows() == 0) {
    throw DataError(ErrorKind::arity_mismatch, "design matrix and targets differ in length");
  }
  const bool any_pos = (y.array() > 0.0).any();
  const bool any_neg = (y.array() < 1.0).any();
  if (!any_pos || !any_neg) {
    throw DataError(ErrorKind::single_class, "logistic fit requires both classes present");
  }

  const Eigen::Index d = X.cols();
  const double n = static_cast<double>(X.rows());
  constexpr double kGradTolerance = 1e-8;
  constexpr int kMaxIterations = 10000;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  double objective = logistic_objective(X, y, w, b, l2);

  for (int iteration = 0; iteration < kMaxIterations; ++iteration) {
    Eigen::VectorXd grad = logistic_gradient(X, y, w, b, l2);
    if (!fit_intercept) grad[d] = 0.0;
    if (grad.norm() <= kGradTolerance) {
      return {w, b, iteration};
    }

    const Eigen::VectorXd z = (X * w).array() + b;
    Eigen::VectorXd s(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z[i]);
      s[i] = std::max(p * (1.0 - p), 1e-12);
    }
    Eigen::MatrixXd hessian(d + 1, d + 1);
    const Eigen::MatrixXd Xs = X.array().colwise() * s.array();
    hessian.topLeftCorner(d, d) = X.transpose() * Xs / n;
    hessian.topLeftCorner(d, d).diagonal().array() += l2;
    hessian.topRightCorner(d, 1) = X.transpose() * s / n;
    hessian.bottomLeftCorner(1, d) = hessian.topRightCorner(d, 1).transpose();
    hessian(d, d) = s.sum() / n;
    if (!fit_intercept) {
      hessian.row(d).setZero();
      hessian.col(d).setZero();
      hessian(d, d) = 1.0;
    }

    Eigen::VectorXd step = hessian.ldlt().solve(grad);
    if (!step.allFinite()) {
      step = grad;  // steepest descent fallback
    }

    // Backtracking line search on the full step.
    double t = 1.0;
    const double slope = grad.dot(step);
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Eigen::VectorXd w_new = w - t * step.head(d);
      const double b_new = fit_intercept ? b - t * step[d] : b;
      const double objective_new = logistic_objective(X, y, w_new, b_new, l2);
      if (objective_new <= objective - 1e-4 * t * slope || objective_new < objective) {
        w = w_new;
        b = b_new;
        objective = objective_new;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // No descent direction left; accept only if already near optimal.
      if (grad.norm() <= 1e-6) {
        return {w, b, iteration};
      }
      throw DataError(ErrorKind::non_convergence, "line search stalled");
    }
  }
  throw DataError(ErrorKind::non_convergence,
                  "no convergence within 10000 Newton iterations");
}

const std::vector<double>& surrogate_c_grid() {
  static const std::vector<double> grid{100.0, 10.0, 1.0, 0.1, 0.01, 0.001, 1e-4, 1e-5};
  return grid;
}

namespace {

double validation_log_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const LogisticFit& fit) {
  const Eigen::VectorXd z = (X * fit.weights).array() + fit.intercept;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z[i]) - y[i] * z[i];
  }
  return loss;
}

}  // namespace

SurrogateResult surrogate_importance(const Dataset& ds, const std::vector<double>& zero_shot_probs,
                                     const SurrogateOptions& options) {
  if (zero_shot_probs.size() != ds.n_rows()) {
    throw DataError(ErrorKind::arity_mismatch, "one zero-shot probability per row required");
  }
  if (options.folds < 2) {
    throw UsageError("cross validation needs at least 2 folds");
  }
  const DesignMatrix design = build_design_matrix(ds, options.standardize);
  const Eigen::Index n = design.values.rows();

  Eigen::VectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = zero_shot_probs[static_cast<std::size_t>(i)];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DataError(ErrorKind::parse_error, "zero-shot probabilities must lie in [0, 1]");
    }
    targets[i] = options.target == SurrogateTarget::hard_label ? (p >= 0.5 ? 1.0 : 0.0) : p;
  }

  // Seeded shuffle, folds assigned round-robin.
  Rng rng = make_rng(options.fold_seed, 0x666f6c64);  // "fold"
  std::vector<std::size_t> order = random_permutation(static_cast<std::size_t>(n), rng);
  std::vector<int> fold_of(n);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(options.folds));
  }

  double best_c = surrogate_c_grid().front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double c : surrogate_c_grid()) {
    double pooled_loss = 0.0;
    for (int fold = 0; fold < options.folds; ++fold) {
      std::vector<Eigen::Index> train_rows, val_rows;
      for (Eigen::Index i = 0; i < n; ++i) {
        (fold_of[i] == fold ? val_rows : train_rows).push_back(i);
      }
      if (train_rows.empty() || val_rows.empty()) continue;
      Eigen::MatrixXd X_train(train_rows.size(), design.values.cols());
      Eigen::VectorXd y_train(train_rows.size());
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        X_train.row(static_cast<Eigen::Index>(i)) = design.values.row(train_rows[i]);
        y_train[static_cast<Eigen::Index>(i)] = targets[train_rows[i]];
      }
      Eigen::MatrixXd X_val(val_rows.size(), design.values.cols());
      Eigen::VectorXd y_val(val_rows.size());
      for (std::size_t i = 0; i < val_rows.size(); ++i) {
        X_val.row(static_cast<Eigen::Index>(i)) = design.values.row(val_rows[i]);
        y_val[static_cast<Eigen::Index>(i)] = targets[val_rows[i]];
      }
      const LogisticFit fit = fit_logistic(X_train, y_train, 1.0 / c, options.intercept);
      pooled_loss += validation_log_loss(X_val, y_val, fit);
    }
    pooled_loss /= static_cast<double>(n);
    if (pooled_loss < best_loss) {
      best_loss = pooled_loss;
      best_c = c;
    }
  }

  const LogisticFit fit = fit_logistic(design.values, targets, 1.0 / best_c, options.intercept);

  SurrogateResult result;
  result.feature_names = design.feature_names;
  result.weights.assign(fit.weights.data(), fit.weights.data() + fit.weights.size());
  result.folds = options.folds;
  result.chosen_c = best_c;
  result.intercept = fit.intercept;

  std::vector<std::size_t> order_by_weight(result.weights.size());
  std::iota(order_by_weight.begin(), order_by_weight.end(), std::size_t{0});
  std::stable_sort(order_by_weight.begin(), order_by_weight.end(),
                   [&](std::size_t a, std::size_t b) { return result.weights[a] > result.weights[b]; });
  result.ranks.resize(result.weights.size());
  for (std::size_t position = 0; position < order_by_weight.size(); ++position) {
    result.ranks[order_by_weight[position]] = position + 1;
  }
  return result;
}

RelativeRisk relative_risk(long long exposed_pos, long long exposed_neg, long long unexposed_pos,
                           long long unexposed_neg) {
  const long long a = exposed_pos, b = exposed_neg, c = unexposed_pos, d = unexposed_neg;
  if (a < 0 || b < 0 || c < 0 || d < 0) {
    throw DataError(ErrorKind::parse_error, "contingency counts must be non-negative");
  }
  if (a + b == 0 || c + d == 0) {
    throw DataError(ErrorKind::parse_error, "both exposure groups must be non-empty");
  }

  RelativeRisk result;
  if (a == 0) {
    result.rr = 0.0;
    result.ci_low = result.ci_high = 0.0;
    result.ci_defined = false;
    return result;
  }
  if (c == 0) {
    result.rr = std::numeric_limits<double>::infinity();
    result.ci_low = result.ci_high = result.rr;
    result.ci_defined = false;
    return result;
  }

  // One rounding for rr: the exact integer cross-products divide once, so
  // rr(a,b,c,d) and rr(c,d,a,b) are correctly rounded exact reciprocals.
  const double numerator = static_cast<double>(a) * static_cast<double>(c + d);
  const double denominator = static_cast<double>(c) * static_cast<double>(a + b);
  result.rr = numerator / denominator;

  const double variance = 1.0 / static_cast<double>(a) - 1.0 / static_cast<double>(a + b) +
                          1.0 / static_cast<double>(c) - 1.0 / static_cast<double>(c + d);
  const double spread = 1.96 * std::sqrt(std::max(variance, 0.0));
  const double log_rr = std::log(result.rr);
  result.ci_low = std::min(std::exp(log_rr - spread), result.rr);
  result.ci_high = std::max(std::exp(log_rr + spread), result.rr);
  result.ci_defined = true;
  return result;
}

}  // namespace tabser
