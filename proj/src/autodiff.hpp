// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace sessrec::ad {

// Dense row-major tensor of doubles, rank <= 2. Vectors are 1 x d rows,
// scalars are 1 x 1. Value-semantic handle onto shared storage so that tape
// closures can hold inputs alive cheaply.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor from(int rows, int cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor row(std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  int rows() const;
  int cols() const;
  int size() const { return rows() * cols(); }
  bool requires_grad() const;

  double at(int r, int c) const;
  double scalar_value() const;  // requires 1 x 1

  std::span<const double> values() const;
  std::span<double> values_mut();
  // Gradient buffer; allocated zero-filled on first access. Only meaningful
  // when requires_grad() is true.
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void zero_grad();

  // Stable identity of the underlying storage (for aliasing checks in tests).
  const void* id() const { return node_.get(); }

 private:
  struct Node {
    int rows = 0;
    int cols = 0;
    bool requires_grad = false;
    std::vector<double> v;
    mutable std::vector<double> g;  // lazily sized to v.size()
  };

  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  Node& node() const;

  std::shared_ptr<Node> node_;

  friend class Tape;
};

// Records primitive operations in execution order; backward() replays them
// exactly once in reverse. One tape belongs to one training step on one
// thread. Gradients accumulate with += into each tensor's buffer; callers
// reset parameter gradients between steps.
class Tape {
 public:
  // C = A * B, (n x k) * (k x m).
  Tensor matmul(const Tensor& a, const Tensor& b);
  // C = A * B^T, (n x k) * (m x k) -> n x m. Saves a transpose copy on the
  // score computation against the item table.
  Tensor matmul_nt(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);

  // Equal shapes, or b a 1 x C row broadcast over the rows of a.
  Tensor add(const Tensor& a, const Tensor& b);
  // Elementwise product. b may broadcast as 1 x 1, 1 x C (over rows) or
  // R x 1 (over columns).
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double k);
  Tensor add_const(const Tensor& a, double c);

  Tensor sigmoid(const Tensor& a);
  Tensor tanh(const Tensor& a);
  // Row-wise softmax with max subtraction.
  Tensor softmax_rows(const Tensor& a);
  // log of values clamped into [eps, 1 - eps]; clamped entries get zero
  // gradient. Keeps cross-entropy terms finite.
  Tensor log_clamped(const Tensor& a, double eps);

  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor concat_rows(const std::vector<Tensor>& parts);

  Tensor gather_rows(const Tensor& a, std::vector<int> idx);
  // out[idx[i], :] += src[i, :]; duplicate indices accumulate.
  Tensor scatter_add_rows(const Tensor& src, std::vector<int> idx, int out_rows);

  Tensor sum(const Tensor& a);        // 1 x 1 total
  Tensor sum_rows(const Tensor& a);   // 1 x C, the sum of all rows
  Tensor mean_rows(const Tensor& a);  // 1 x C, the mean of all rows

  // Cosine similarity of two 1 x d rows -> 1 x 1. A zero-norm operand yields
  // 0 with zero gradient.
  Tensor cosine_sim(const Tensor& a, const Tensor& b);

  // Seeds d(loss)/d(loss) = 1 and replays all records in reverse. loss must
  // be 1 x 1 and require grad. Calling backward again without resetting
  // gradients accumulates.
  void backward(const Tensor& loss);

  std::size_t size() const { return records_.size(); }
  void clear() { records_.clear(); }

 private:
  Tensor make_output(int rows, int cols, bool requires_grad);
  void record(std::function<void()> back);

  std::vector<std::function<void()>> records_;
};

}  // namespace sessrec::ad
