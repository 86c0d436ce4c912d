#include "metalr/subspace.hpp"

#include "metalr/parallel.hpp"

#include <algorithm>

namespace metalr {

HalfEstimates half_estimates(const TaskBatch& task) {
  validate_task(task);
  const Index half = task.size() / 2;
  require(half >= 1, "split-sample estimates need t >= 2");
  HalfEstimates out;
  out.b1 = task.X.topRows(half).transpose() * task.y.head(half) / static_cast<double>(half);
  out.b2 = task.X.middleRows(half, half).transpose() * task.y.segment(half, half) / static_cast<double>(half);
  return out;
}

MomentAccumulator::MomentAccumulator(Index d) : sum_(Matrix::Zero(d, d)), compensation_(Matrix::Zero(d, d)) {}

void MomentAccumulator::add_cross(const Matrix& cross, Index count) {
  // Kahan step, elementwise.
  const Matrix y = cross - compensation_;
  const Matrix t = sum_ + y;
  compensation_ = (t - sum_) - y;
  sum_ = t;
  count_ += count;
}

void MomentAccumulator::add_chunk(const Matrix& B1, const Matrix& B2) {
  require(B1.rows() == B2.rows() && B1.cols() == sum_.rows() && B2.cols() == sum_.rows(),
          "moment chunk dimension mismatch");
  require(B1.rows() <= kChunk, "moment chunk larger than kChunk");
  add_cross(B1.transpose() * B2, B1.rows());
}

SymMatrix MomentAccumulator::finish() const {
  require(count_ >= 1, "moment matrix needs at least one task");
  Matrix m = (sum_ + sum_.transpose()) / (2.0 * static_cast<double>(count_));
  return SymMatrix(std::move(m));
}

namespace {

Matrix chunk_cross(Index begin, Index end, Index d, const std::function<TaskBatch(std::size_t)>& task_at) {
  Matrix B1(end - begin, d);
  Matrix B2(end - begin, d);
  for (Index i = begin; i < end; ++i) {
    const auto h = half_estimates(task_at(static_cast<std::size_t>(i)));
    require(h.b1.size() == d, "task dimension mismatch");
    B1.row(i - begin) = h.b1.transpose();
    B2.row(i - begin) = h.b2.transpose();
  }
  return B1.transpose() * B2;
}

}  // namespace

SymMatrix moment_matrix_streamed(Index n, Index d, const std::function<TaskBatch(std::size_t)>& task_at,
                                 unsigned threads) {
  require(n >= 1, "moment matrix needs a nonempty task collection");
  MomentAccumulator acc(d);
  const Index chunks = (n + MomentAccumulator::kChunk - 1) / MomentAccumulator::kChunk;
  const Index wave = std::max<Index>(1, threads);
  for (Index first = 0; first < chunks; first += wave) {
    const Index last = std::min(chunks, first + wave);
    std::vector<Matrix> crosses(static_cast<std::size_t>(last - first));
    parallel_for(crosses.size(), threads, [&](std::size_t c) {
      const Index begin = (first + static_cast<Index>(c)) * MomentAccumulator::kChunk;
      const Index end = std::min(n, begin + MomentAccumulator::kChunk);
      crosses[c] = chunk_cross(begin, end, d, task_at);
    });
    for (std::size_t c = 0; c < crosses.size(); ++c) {
      const Index begin = (first + static_cast<Index>(c)) * MomentAccumulator::kChunk;
      acc.add_cross(crosses[c], std::min(n, begin + MomentAccumulator::kChunk) - begin);
    }
  }
  return acc.finish();
}

SymMatrix moment_matrix(const std::vector<TaskBatch>& tasks, unsigned threads) {
  require(!tasks.empty(), "moment matrix needs a nonempty task collection");
  return moment_matrix_streamed(static_cast<Index>(tasks.size()), tasks.front().dim(),
                                [&](std::size_t i) { return tasks[i]; }, threads);
}

Subspace estimate_subspace(const std::vector<TaskBatch>& tasks, Index k, unsigned threads) {
  return top_k_eig(moment_matrix(tasks, threads), k).subspace;
}

}  // namespace metalr
