// Copyright sessrec contributors. Licensed under the terms of the Apache 2.0 license.
// See LICENSE in the project root.
#include "autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "error.hpp"

namespace sessrec::ad {

namespace {

[[noreturn]] void shape_fail(const std::string& prim, const Tensor& a) {
  throw ShapeError(prim + ": incompatible shape " + std::to_string(a.rows()) +
                   "x" + std::to_string(a.cols()));
}

[[noreturn]] void shape_fail2(const std::string& prim, const Tensor& a,
                              const Tensor& b) {
  throw ShapeError(prim + ": incompatible shapes " + std::to_string(a.rows()) +
                   "x" + std::to_string(a.cols()) + " and " +
                   std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor::Node& Tensor::node() const {
  if (!node_) throw PreconditionError("tensor: use of undefined tensor");
  return *node_;
}

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  if (rows < 0 || cols < 0) throw ShapeError("tensor: negative dimension");
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->requires_grad = requires_grad;
  n->v.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  return Tensor(std::move(n));
}

Tensor Tensor::from(int rows, int cols, std::vector<double> values,
                    bool requires_grad) {
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("tensor: value count " + std::to_string(values.size()) +
                     " does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  auto n = std::make_shared<Node>();
  n->rows = rows;
  n->cols = cols;
  n->requires_grad = requires_grad;
  n->v = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::row(std::vector<double> values, bool requires_grad) {
  const int c = static_cast<int>(values.size());
  return from(1, c, std::move(values), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(1, 1, {value}, requires_grad);
}

int Tensor::rows() const { return node().rows; }
int Tensor::cols() const { return node().cols; }
bool Tensor::requires_grad() const { return node().requires_grad; }

double Tensor::at(int r, int c) const {
  const Node& n = node();
  return n.v[static_cast<std::size_t>(r) * n.cols + c];
}

double Tensor::scalar_value() const {
  if (rows() != 1 || cols() != 1) shape_fail("scalar_value", *this);
  return node().v[0];
}

std::span<const double> Tensor::values() const { return node().v; }
std::span<double> Tensor::values_mut() { return node().v; }

std::span<const double> Tensor::grad() const {
  Node& n = node();
  if (n.g.size() != n.v.size()) n.g.assign(n.v.size(), 0.0);
  return n.g;
}

std::span<double> Tensor::grad_mut() {
  Node& n = node();
  if (n.g.size() != n.v.size()) n.g.assign(n.v.size(), 0.0);
  return n.g;
}

void Tensor::zero_grad() {
  Node& n = node();
  n.g.assign(n.v.size(), 0.0);
}

Tensor Tape::make_output(int rows, int cols, bool requires_grad) {
  return Tensor::zeros(rows, cols, requires_grad);
}

void Tape::record(std::function<void()> back) {
  records_.push_back(std::move(back));
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail2("matmul", a, b);
  const int n = a.rows(), k = a.cols(), m = b.cols();
  Tensor c = make_output(n, m, a.requires_grad() || b.requires_grad());
  {
    auto av = a.values();
    auto bv = b.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i) {
      for (int p = 0; p < k; ++p) {
        const double aip = av[i * k + p];
        if (aip == 0.0) continue;
        for (int j = 0; j < m; ++j) cv[i * m + j] += aip * bv[p * m + j];
      }
    }
  }
  if (c.requires_grad()) {
    record([a, b, c, n, k, m]() mutable {
      auto gc = c.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_mut();
        auto bv = b.values();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const double g = gc[i * m + j];
            if (g == 0.0) continue;
            for (int p = 0; p < k; ++p) ga[i * k + p] += g * bv[p * m + j];
          }
      }
      if (b.requires_grad()) {
        auto gb = b.grad_mut();
        auto av = a.values();
        for (int i = 0; i < n; ++i)
          for (int p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            for (int j = 0; j < m; ++j) gb[p * m + j] += aip * gc[i * m + j];
          }
      }
    });
  }
  return c;
}

Tensor Tape::matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) shape_fail2("matmul_nt", a, b);
  const int n = a.rows(), k = a.cols(), m = b.rows();
  Tensor c = make_output(n, m, a.requires_grad() || b.requires_grad());
  {
    auto av = a.values();
    auto bv = b.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        for (int p = 0; p < k; ++p) acc += av[i * k + p] * bv[j * k + p];
        cv[i * m + j] = acc;
      }
  }
  if (c.requires_grad()) {
    record([a, b, c, n, k, m]() mutable {
      auto gc = c.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_mut();
        auto bv = b.values();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const double g = gc[i * m + j];
            if (g == 0.0) continue;
            for (int p = 0; p < k; ++p) ga[i * k + p] += g * bv[j * k + p];
          }
      }
      if (b.requires_grad()) {
        auto gb = b.grad_mut();
        auto av = a.values();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const double g = gc[i * m + j];
            if (g == 0.0) continue;
            for (int p = 0; p < k; ++p) gb[j * k + p] += g * av[i * k + p];
          }
      }
    });
  }
  return c;
}

Tensor Tape::transpose(const Tensor& a) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(m, n, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cv[j * n + i] = av[i * m + j];
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      auto gc = c.grad();
      auto ga = a.grad_mut();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) ga[i * m + j] += gc[j * n + i];
    });
  }
  return c;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  const bool row_bcast = b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols();
  if (!row_bcast && (a.rows() != b.rows() || a.cols() != b.cols())) {
    shape_fail2("add", a, b);
  }
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(n, m, a.requires_grad() || b.requires_grad());
  {
    auto av = a.values();
    auto bv = b.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        cv[i * m + j] = av[i * m + j] + (row_bcast ? bv[j] : bv[i * m + j]);
  }
  if (c.requires_grad()) {
    record([a, b, c, n, m, row_bcast]() mutable {
      auto gc = c.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_mut();
        for (int i = 0; i < n * m; ++i) ga[i] += gc[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_mut();
        if (row_bcast) {
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) gb[j] += gc[i * m + j];
        } else {
          for (int i = 0; i < n * m; ++i) gb[i] += gc[i];
        }
      }
    });
  }
  return c;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  enum class Mode { kEqual, kScalar, kRow, kCol };
  Mode mode;
  if (b.rows() == 1 && b.cols() == 1 && a.size() != 1) {
    mode = Mode::kScalar;
  } else if (a.rows() == b.rows() && a.cols() == b.cols()) {
    mode = Mode::kEqual;
  } else if (b.rows() == 1 && b.cols() == a.cols()) {
    mode = Mode::kRow;
  } else if (b.cols() == 1 && b.rows() == a.rows()) {
    mode = Mode::kCol;
  } else {
    shape_fail2("mul", a, b);
  }
  const int n = a.rows(), m = a.cols();
  auto b_at = [mode, m](std::span<const double> bv, int i, int j) {
    switch (mode) {
      case Mode::kScalar: return bv[0];
      case Mode::kRow: return bv[j];
      case Mode::kCol: return bv[i];
      default: return bv[i * m + j];
    }
  };
  Tensor c = make_output(n, m, a.requires_grad() || b.requires_grad());
  {
    auto av = a.values();
    auto bv = b.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        cv[i * m + j] = av[i * m + j] * b_at(bv, i, j);
  }
  if (c.requires_grad()) {
    record([a, b, c, n, m, mode, b_at]() mutable {
      auto gc = c.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_mut();
        auto bv = b.values();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j)
            ga[i * m + j] += gc[i * m + j] * b_at(bv, i, j);
      }
      if (b.requires_grad()) {
        auto gb = b.grad_mut();
        auto av = a.values();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const double g = gc[i * m + j] * av[i * m + j];
            switch (mode) {
              case Mode::kScalar: gb[0] += g; break;
              case Mode::kRow: gb[j] += g; break;
              case Mode::kCol: gb[i] += g; break;
              default: gb[i * m + j] += g; break;
            }
          }
      }
    });
  }
  return c;
}

Tensor Tape::scale(const Tensor& a, double k) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n * m; ++i) cv[i] = av[i] * k;
  }
  if (c.requires_grad()) {
    record([a, c, n, m, k]() mutable {
      auto gc = c.grad();
      auto ga = a.grad_mut();
      for (int i = 0; i < n * m; ++i) ga[i] += gc[i] * k;
    });
  }
  return c;
}

Tensor Tape::add_const(const Tensor& a, double cst) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n * m; ++i) cv[i] = av[i] + cst;
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      auto gc = c.grad();
      auto ga = a.grad_mut();
      for (int i = 0; i < n * m; ++i) ga[i] += gc[i];
    });
  }
  return c;
}

Tensor Tape::sigmoid(const Tensor& a) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n * m; ++i) cv[i] = stable_sigmoid(av[i]);
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      auto gc = c.grad();
      auto cv = c.values();
      auto ga = a.grad_mut();
      for (int i = 0; i < n * m; ++i) ga[i] += gc[i] * cv[i] * (1.0 - cv[i]);
    });
  }
  return c;
}

Tensor Tape::tanh(const Tensor& a) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n * m; ++i) cv[i] = std::tanh(av[i]);
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      auto gc = c.grad();
      auto cv = c.values();
      auto ga = a.grad_mut();
      for (int i = 0; i < n * m; ++i) ga[i] += gc[i] * (1.0 - cv[i] * cv[i]);
    });
  }
  return c;
}

Tensor Tape::softmax_rows(const Tensor& a) {
  const int n = a.rows(), m = a.cols();
  if (m == 0) shape_fail("softmax_rows", a);
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i) {
      double mx = av[i * m];
      for (int j = 1; j < m; ++j) mx = std::max(mx, av[i * m + j]);
      double denom = 0.0;
      for (int j = 0; j < m; ++j) {
        cv[i * m + j] = std::exp(av[i * m + j] - mx);
        denom += cv[i * m + j];
      }
      for (int j = 0; j < m; ++j) cv[i * m + j] /= denom;
    }
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      auto gc = c.grad();
      auto cv = c.values();
      auto ga = a.grad_mut();
      for (int i = 0; i < n; ++i) {
        double dot = 0.0;
        for (int j = 0; j < m; ++j) dot += gc[i * m + j] * cv[i * m + j];
        for (int j = 0; j < m; ++j)
          ga[i * m + j] += cv[i * m + j] * (gc[i * m + j] - dot);
      }
    });
  }
  return c;
}

Tensor Tape::log_clamped(const Tensor& a, double eps) {
  if (!(eps > 0.0) || eps >= 0.5) {
    throw PreconditionError("log_clamped: eps must be in (0, 0.5)");
  }
  const int n = a.rows(), m = a.cols();
  const double hi = 1.0 - eps;
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n * m; ++i)
      cv[i] = std::log(std::clamp(av[i], eps, hi));
  }
  if (c.requires_grad()) {
    record([a, c, n, m, eps, hi]() mutable {
      auto gc = c.grad();
      auto av = a.values();
      auto ga = a.grad_mut();
      for (int i = 0; i < n * m; ++i) {
        if (av[i] > eps && av[i] < hi) ga[i] += gc[i] / av[i];
      }
    });
  }
  return c;
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw PreconditionError("concat_cols: empty input");
  const int n = parts.front().rows();
  int m = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.rows() != n) shape_fail2("concat_cols", parts.front(), p);
    m += p.cols();
    rg = rg || p.requires_grad();
  }
  Tensor c = make_output(n, m, rg);
  {
    auto cv = c.values_mut();
    int off = 0;
    for (const Tensor& p : parts) {
      auto pv = p.values();
      const int pc = p.cols();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < pc; ++j) cv[i * m + off + j] = pv[i * pc + j];
      off += pc;
    }
  }
  if (rg) {
    record([parts, c, n, m]() mutable {
      auto gc = c.grad();
      int off = 0;
      for (Tensor& p : parts) {
        const int pc = p.cols();
        if (p.requires_grad()) {
          auto gp = p.grad_mut();
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < pc; ++j) gp[i * pc + j] += gc[i * m + off + j];
        }
        off += pc;
      }
    });
  }
  return c;
}

Tensor Tape::concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw PreconditionError("concat_rows: empty input");
  const int m = parts.front().cols();
  int n = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    if (p.cols() != m) shape_fail2("concat_rows", parts.front(), p);
    n += p.rows();
    rg = rg || p.requires_grad();
  }
  Tensor c = make_output(n, m, rg);
  {
    auto cv = c.values_mut();
    int off = 0;
    for (const Tensor& p : parts) {
      auto pv = p.values();
      std::copy(pv.begin(), pv.end(), cv.begin() + off);
      off += p.size();
    }
  }
  if (rg) {
    record([parts, c]() mutable {
      auto gc = c.grad();
      int off = 0;
      for (Tensor& p : parts) {
        if (p.requires_grad()) {
          auto gp = p.grad_mut();
          for (int i = 0; i < p.size(); ++i) gp[i] += gc[off + i];
        }
        off += p.size();
      }
    });
  }
  return c;
}

Tensor Tape::gather_rows(const Tensor& a, std::vector<int> idx) {
  const int m = a.cols();
  for (int i : idx) {
    if (i < 0 || i >= a.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(i) +
                       " out of range for " + std::to_string(a.rows()) +
                       " rows");
    }
  }
  const int n = static_cast<int>(idx.size());
  Tensor c = make_output(n, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cv[i * m + j] = av[idx[i] * m + j];
  }
  if (c.requires_grad()) {
    record([a, c, idx = std::move(idx), n, m]() mutable {
      auto gc = c.grad();
      auto ga = a.grad_mut();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) ga[idx[i] * m + j] += gc[i * m + j];
    });
  }
  return c;
}

Tensor Tape::scatter_add_rows(const Tensor& src, std::vector<int> idx,
                              int out_rows) {
  if (static_cast<int>(idx.size()) != src.rows()) {
    throw ShapeError("scatter_add_rows: " + std::to_string(idx.size()) +
                     " indices for " + std::to_string(src.rows()) + " rows");
  }
  for (int i : idx) {
    if (i < 0 || i >= out_rows) {
      throw ShapeError("scatter_add_rows: index " + std::to_string(i) +
                       " out of range for " + std::to_string(out_rows) +
                       " rows");
    }
  }
  const int n = src.rows(), m = src.cols();
  Tensor c = make_output(out_rows, m, src.requires_grad());
  {
    auto sv = src.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cv[idx[i] * m + j] += sv[i * m + j];
  }
  if (c.requires_grad()) {
    record([src, c, idx = std::move(idx), n, m]() mutable {
      auto gc = c.grad();
      auto gs = src.grad_mut();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) gs[i * m + j] += gc[idx[i] * m + j];
    });
  }
  return c;
}

Tensor Tape::sum(const Tensor& a) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(1, 1, a.requires_grad());
  {
    auto av = a.values();
    double acc = 0.0;
    for (int i = 0; i < n * m; ++i) acc += av[i];
    c.values_mut()[0] = acc;
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      const double g = c.grad()[0];
      auto ga = a.grad_mut();
      for (int i = 0; i < n * m; ++i) ga[i] += g;
    });
  }
  return c;
}

Tensor Tape::sum_rows(const Tensor& a) {
  const int n = a.rows(), m = a.cols();
  Tensor c = make_output(1, m, a.requires_grad());
  {
    auto av = a.values();
    auto cv = c.values_mut();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) cv[j] += av[i * m + j];
  }
  if (c.requires_grad()) {
    record([a, c, n, m]() mutable {
      auto gc = c.grad();
      auto ga = a.grad_mut();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) ga[i * m + j] += gc[j];
    });
  }
  return c;
}

Tensor Tape::mean_rows(const Tensor& a) {
  if (a.rows() == 0) shape_fail("mean_rows", a);
  return scale(sum_rows(a), 1.0 / a.rows());
}

Tensor Tape::cosine_sim(const Tensor& a, const Tensor& b) {
  if (a.rows() != 1 || b.rows() != 1 || a.cols() != b.cols()) {
    shape_fail2("cosine_sim", a, b);
  }
  const int d = a.cols();
  auto av = a.values();
  auto bv = b.values();
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (int i = 0; i < d; ++i) {
    dot += av[i] * bv[i];
    na2 += av[i] * av[i];
    nb2 += bv[i] * bv[i];
  }
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  const bool degenerate = na == 0.0 || nb == 0.0;
  const double cos = degenerate ? 0.0 : dot / (na * nb);
  Tensor c = make_output(1, 1, a.requires_grad() || b.requires_grad());
  c.values_mut()[0] = cos;
  if (c.requires_grad() && !degenerate) {
    record([a, b, c, d, na, nb, cos]() mutable {
      const double g = c.grad()[0];
      auto av = a.values();
      auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_mut();
        for (int i = 0; i < d; ++i)
          ga[i] += g * (bv[i] / (na * nb) - cos * av[i] / (na * na));
      }
      if (b.requires_grad()) {
        auto gb = b.grad_mut();
        for (int i = 0; i < d; ++i)
          gb[i] += g * (av[i] / (na * nb) - cos * bv[i] / (nb * nb));
      }
    });
  }
  return c;
}

void Tape::backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw PreconditionError("backward: loss must be a 1x1 scalar, got " +
                            std::to_string(loss.rows()) + "x" +
                            std::to_string(loss.cols()));
  }
  if (!loss.requires_grad()) {
    throw PreconditionError("backward: loss does not require grad");
  }
  Tensor l = loss;
  l.grad_mut()[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

}  // namespace sessrec::ad
