#pragma once

#include "metalr/model.hpp"

namespace metalr {

/// Posterior over components for a new task under a fitted prior.
/// log_w(i) = -RSS_i / (2 s^2_i) - tau log s_i + log p_i; `normalized` is the
/// softmax of log_w, formed with the max subtracted first.
struct PosteriorWeights {
  Vector log_w;
  Vector normalized;
};

PosteriorWeights posterior_log_weights(const TaskBatch& data, const FittedModel& model);

struct MapEstimate {
  int index = 0;
  Vector beta;
};

/// Component with the largest posterior weight (smallest index on ties).
MapEstimate predict_map(const TaskBatch& data, const FittedModel& model);
MapEstimate predict_map(const PosteriorWeights& weights, const FittedModel& model);

/// Posterior mean of the regression vector.
Vector predict_bayes(const TaskBatch& data, const FittedModel& model);
Vector predict_bayes(const PosteriorWeights& weights, const FittedModel& model);

double predict_y(const Vector& x, const Vector& beta);

}  // namespace metalr
