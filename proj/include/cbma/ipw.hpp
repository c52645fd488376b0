#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbma/dataset.hpp"

namespace cbma {

// l1-penalized logistic propensity model e(w) = sigma(intercept + w'coef).
struct PropensityModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double penalty = 0.0;
  std::vector<double> objective_history;  // non-increasing by construction
  int iterations = 0;
  bool converged = false;

  double propensity(const Eigen::VectorXd& w) const {
    const double z = intercept + coefficients.dot(w);
    return 1.0 / (1.0 + std::exp(-z));
  }
};

struct LogisticL1Config {
  int max_iter = 5000;
  double tol = 1e-6;  // gradient-map norm
};

namespace detail {

inline double softplus(double t) {
  // log(1 + e^t) without overflow
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

inline double soft_threshold(double v, double cut) {
  if (v > cut) return v - cut;
  if (v < -cut) return v + cut;
  return 0.0;
}

}  // namespace detail

// Minimizes mean negative log likelihood + lambda * ||coefficients||_1
// (intercept unpenalized) by proximal gradient with backtracking. The
// accepted-step condition keeps the objective non-increasing.
inline PropensityModel logistic_l1_fit(const Eigen::MatrixXd& features,
                                       const Eigen::VectorXd& labels,
                                       double lambda,
                                       const LogisticL1Config& config = {}) {
  const Eigen::Index n = features.rows();
  const Eigen::Index k = features.cols();
  if (labels.size() != n) throw std::invalid_argument("label/feature size mismatch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  int ones = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels(i) == 0.0) continue;
    if (labels(i) == 1.0) {
      ++ones;
      continue;
    }
    throw std::invalid_argument("labels must be 0 or 1");
  }
  if (ones == 0 || ones == n) {
    throw std::invalid_argument("degenerate input: labels contain a single class");
  }

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(k);
  double intercept = 0.0;

  auto smooth_loss = [&](double b, const Eigen::VectorXd& w) {
    const Eigen::VectorXd z = (features * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double margin = (2.0 * labels(i) - 1.0) * z(i);
      loss += detail::softplus(-margin);
    }
    return loss / static_cast<double>(n);
  };
  auto objective = [&](double b, const Eigen::VectorXd& w) {
    return smooth_loss(b, w) + lambda * w.cwiseAbs().sum();
  };

  PropensityModel model;
  model.penalty = lambda;
  model.objective_history.push_back(objective(intercept, coef));

  double step = 1.0;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    const Eigen::VectorXd z = (features * coef).array() + intercept;
    const Eigen::VectorXd residual =
        (1.0 / (1.0 + (-z.array()).exp())) - labels.array();
    const Eigen::VectorXd grad_w = features.transpose() * residual / double(n);
    const double grad_b = residual.mean();
    const double f0 = smooth_loss(intercept, coef);

    step = std::min(step * 2.0, 1e6);
    double new_intercept = 0.0;
    Eigen::VectorXd new_coef;
    while (true) {
      new_intercept = intercept - step * grad_b;
      new_coef.resize(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        new_coef(i) =
            detail::soft_threshold(coef(i) - step * grad_w(i), step * lambda);
      }
      const Eigen::VectorXd dw = new_coef - coef;
      const double db = new_intercept - intercept;
      const double quad =
          f0 + grad_w.dot(dw) + grad_b * db +
          (dw.squaredNorm() + db * db) / (2.0 * step);
      if (smooth_loss(new_intercept, new_coef) <= quad + 1e-15) break;
      step *= 0.5;
      if (step < 1e-18) break;
    }

    const double move = std::sqrt((new_coef - coef).squaredNorm() +
                                  (new_intercept - intercept) *
                                      (new_intercept - intercept));
    const double grad_map = move / step;
    coef = new_coef;
    intercept = new_intercept;
    model.objective_history.push_back(objective(intercept, coef));
    model.iterations = iter;
    if (grad_map < config.tol) {
      model.converged = true;
      break;
    }
  }

  model.coefficients = coef;
  model.intercept = intercept;
  if (!model.coefficients.allFinite() || !std::isfinite(model.intercept)) {
    throw std::runtime_error("logistic fit produced non-finite coefficients");
  }
  return model;
}

// Horvitz-Thompson inverse-probability-weighted ATE with the propensity
// clipped to [eps, 1-eps], eps = 0.01.
inline double ipw_ate(const Dataset& data, const std::string& treatment,
                      const std::string& outcome,
                      const std::vector<std::string>& covariates,
                      double lambda) {
  const int t_col = data.column_index(treatment);
  const int y_col = data.column_index(outcome);
  const std::vector<int> cov_cols = resolve_columns(data, covariates);
  const Eigen::Index n = data.sample_count();

  Eigen::VectorXd t = data.values.col(t_col);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(t(i)) < 1e-9) {
      t(i) = 0.0;
    } else if (std::abs(t(i) - 1.0) < 1e-9) {
      t(i) = 1.0;
    } else {
      throw std::invalid_argument("treatment column is not binary");
    }
  }

  Eigen::MatrixXd features(n, cov_cols.size());
  for (std::size_t c = 0; c < cov_cols.size(); ++c) {
    features.col(c) = data.values.col(cov_cols[c]);
  }
  const PropensityModel model = logistic_l1_fit(features, t, lambda);

  constexpr double kClip = 0.01;
  const Eigen::VectorXd y = data.values.col(y_col);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = std::clamp(model.propensity(features.row(i).transpose()),
                                kClip, 1.0 - kClip);
    total += t(i) * y(i) / e - (1.0 - t(i)) * y(i) / (1.0 - e);
  }
  return total / static_cast<double>(n);
}

}  // namespace cbma
