#include "metalr/predict.hpp"

#include <cmath>

namespace metalr {

PosteriorWeights posterior_log_weights(const TaskBatch& data, const FittedModel& model) {
  validate_task(data);
  const Index k = model.components();
  require(data.dim() == model.dim(), "task and model dimensions differ");
  require(model.s2_hat.size() == k && model.p_hat.size() == k, "fitted model shape mismatch");
  require((model.s2_hat.array() > 0.0).all(), "noise variances must be positive");
  require(model.p_valid && (model.p_hat.array() > 0.0).all(), "mixing weights must be positive");

  const double tau = static_cast<double>(data.size());
  const Matrix residuals = (-(data.X * model.W_hat)).colwise() + data.y;
  PosteriorWeights out;
  out.log_w.resize(k);
  for (Index i = 0; i < k; ++i)
    out.log_w(i) = -residuals.col(i).squaredNorm() / (2.0 * model.s2_hat(i)) - 0.5 * tau * std::log(model.s2_hat(i)) +
                   std::log(model.p_hat(i));
  const double top = out.log_w.maxCoeff();
  out.normalized = (out.log_w.array() - top).exp();
  out.normalized /= out.normalized.sum();
  return out;
}

MapEstimate predict_map(const PosteriorWeights& weights, const FittedModel& model) {
  Index best = 0;
  for (Index i = 1; i < weights.log_w.size(); ++i)
    if (weights.log_w(i) > weights.log_w(best)) best = i;
  return MapEstimate{static_cast<int>(best), model.W_hat.col(best)};
}

MapEstimate predict_map(const TaskBatch& data, const FittedModel& model) {
  return predict_map(posterior_log_weights(data, model), model);
}

Vector predict_bayes(const PosteriorWeights& weights, const FittedModel& model) {
  return model.W_hat * weights.normalized;
}

Vector predict_bayes(const TaskBatch& data, const FittedModel& model) {
  return predict_bayes(posterior_log_weights(data, model), model);
}

double predict_y(const Vector& x, const Vector& beta) {
  require(x.size() == beta.size(), "feature and parameter dimensions differ");
  return x.dot(beta);
}

}  // namespace metalr
