#pragma once

#include "metalr/linalg.hpp"
#include "metalr/model.hpp"

#include <functional>
#include <vector>

namespace metalr {

/// Split-sample moment estimates of one task: b1 averages y x over the first
/// floor(t/2) examples, b2 over the next floor(t/2). An odd trailing example
/// is dropped so that the halves stay independent.
struct HalfEstimates {
  Vector b1;
  Vector b2;
};

HalfEstimates half_estimates(const TaskBatch& task);

/// Accumulates M = (2n)^-1 sum_i (b1_i b2_i^T + b2_i b1_i^T).
///
/// Tasks are grouped into fixed chunks of kChunk tasks; each chunk's cross
/// product is formed with one matrix product and folded into a Kahan-
/// compensated running sum in chunk order. The result therefore depends only
/// on the task sequence, never on how chunks were scheduled.
class MomentAccumulator {
 public:
  static constexpr Index kChunk = 256;

  explicit MomentAccumulator(Index d);

  /// Adds the chunk of half estimates (rows of B1, B2 are b1_i, b2_i).
  /// Every call but the last must carry exactly kChunk rows.
  void add_chunk(const Matrix& B1, const Matrix& B2);
  /// Adds an already-formed chunk cross product B1^T B2 covering `count`
  /// tasks.
  void add_cross(const Matrix& cross, Index count);

  Index count() const { return count_; }
  SymMatrix finish() const;

 private:
  Matrix sum_;
  Matrix compensation_;
  Index count_ = 0;
};

/// Moment matrix of a materialized collection.
SymMatrix moment_matrix(const std::vector<TaskBatch>& tasks, unsigned threads = 1);

/// Moment matrix of n tasks produced on demand by `task_at(i)`; nothing but
/// one chunk per worker is kept in memory.
SymMatrix moment_matrix_streamed(Index n, Index d, const std::function<TaskBatch(std::size_t)>& task_at,
                                 unsigned threads = 1);

/// Top-k eigenvectors of the moment matrix.
Subspace estimate_subspace(const std::vector<TaskBatch>& tasks, Index k, unsigned threads = 1);

}  // namespace metalr
