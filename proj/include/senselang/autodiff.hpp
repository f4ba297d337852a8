// Copyright 2026 The SenseLang Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace senselang::ad {

using Mat = Eigen::MatrixXd;

// One node of the dynamically built computation graph. Gradients flow from
// a scalar root back into every node whose subgraph reaches it.
struct Node {
  Mat val;
  Mat grad;
  std::vector<std::shared_ptr<Node>> parents;
  // Accumulates this->grad into the parents' grad fields.
  std::function<void(Node&)> backfn;
  int visit_mark = 0;
};

using Tensor = std::shared_ptr<Node>;

inline Tensor make_tensor(Mat val, std::vector<Tensor> parents = {},
                          std::function<void(Node&)> backfn = nullptr) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->parents = std::move(parents);
  n->backfn = std::move(backfn);
  return n;
}

inline Tensor constant(Mat val) { return make_tensor(std::move(val)); }

// Runs reverse-mode accumulation from a 1x1 root.
inline void backward(const Tensor& root) {
  if (root->val.rows() != 1 || root->val.cols() != 1) {
    throw std::invalid_argument("backward: root must be scalar");
  }
  // Iterative post-order topological sort.
  std::vector<Node*> topo;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.push_back({root.get(), 0});
  root->visit_mark = 1;
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx].get();
      ++idx;
      if (p->visit_mark == 0) {
        p->visit_mark = 1;
        stack.push_back({p, 0});
      }
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : topo) {
    n->grad = Mat::Zero(n->val.rows(), n->val.cols());
    n->visit_mark = 0;
  }
  root->grad(0, 0) = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if ((*it)->backfn) (*it)->backfn(**it);
  }
}

// ---- elementwise / linear ops ----

inline Tensor add(const Tensor& a, const Tensor& b) {
  return make_tensor(a->val + b->val, {a, b}, [](Node& n) {
    n.parents[0]->grad += n.grad;
    n.parents[1]->grad += n.grad;
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  return make_tensor(a->val - b->val, {a, b}, [](Node& n) {
    n.parents[0]->grad += n.grad;
    n.parents[1]->grad -= n.grad;
  });
}

inline Tensor scale(const Tensor& a, double c) {
  return make_tensor(a->val * c, {a}, [c](Node& n) {
    n.parents[0]->grad += c * n.grad;
  });
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  return make_tensor(a->val.cwiseProduct(b->val), {a, b}, [](Node& n) {
    n.parents[0]->grad += n.grad.cwiseProduct(n.parents[1]->val);
    n.parents[1]->grad += n.grad.cwiseProduct(n.parents[0]->val);
  });
}

inline Tensor hadamard_const(const Tensor& a, Mat mask) {
  Mat v = a->val.cwiseProduct(mask);
  return make_tensor(std::move(v), {a}, [mask = std::move(mask)](Node& n) {
    n.parents[0]->grad += n.grad.cwiseProduct(mask);
  });
}

// X (n x d) + broadcast row b (1 x d)
inline Tensor add_rowvec(const Tensor& x, const Tensor& b) {
  if (b->val.rows() != 1 || b->val.cols() != x->val.cols()) {
    throw std::invalid_argument("add_rowvec: shape mismatch");
  }
  Mat v = x->val.rowwise() + b->val.row(0);
  return make_tensor(std::move(v), {x, b}, [](Node& n) {
    n.parents[0]->grad += n.grad;
    n.parents[1]->grad += n.grad.colwise().sum();
  });
}

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  return make_tensor(a->val * b->val, {a, b}, [](Node& n) {
    n.parents[0]->grad += n.grad * n.parents[1]->val.transpose();
    n.parents[1]->grad += n.parents[0]->val.transpose() * n.grad;
  });
}

// a * b^T
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  return make_tensor(a->val * b->val.transpose(), {a, b}, [](Node& n) {
    n.parents[0]->grad += n.grad * n.parents[1]->val;
    n.parents[1]->grad += n.grad.transpose() * n.parents[0]->val;
  });
}

inline Tensor transpose(const Tensor& a) {
  return make_tensor(a->val.transpose(), {a}, [](Node& n) {
    n.parents[0]->grad += n.grad.transpose();
  });
}

inline Tensor slice_rows(const Tensor& x, int start, int count) {
  Mat v = x->val.middleRows(start, count);
  return make_tensor(std::move(v), {x}, [start, count](Node& n) {
    n.parents[0]->grad.middleRows(start, count) += n.grad;
  });
}

inline Tensor slice_cols(const Tensor& x, int start, int count) {
  Mat v = x->val.middleCols(start, count);
  return make_tensor(std::move(v), {x}, [start, count](Node& n) {
    n.parents[0]->grad.middleCols(start, count) += n.grad;
  });
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  Eigen::Index rows = parts[0]->val.rows(), cols = 0;
  for (const auto& p : parts) cols += p->val.cols();
  Mat v(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p->val.cols()) = p->val;
    off += p->val.cols();
  }
  return make_tensor(std::move(v), parts, [](Node& n) {
    Eigen::Index off = 0;
    for (auto& p : n.parents) {
      p->grad += n.grad.middleCols(off, p->val.cols());
      off += p->val.cols();
    }
  });
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  Eigen::Index cols = parts[0]->val.cols(), rows = 0;
  for (const auto& p : parts) rows += p->val.rows();
  Mat v(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleRows(off, p->val.rows()) = p->val;
    off += p->val.rows();
  }
  return make_tensor(std::move(v), parts, [](Node& n) {
    Eigen::Index off = 0;
    for (auto& p : n.parents) {
      p->grad += n.grad.middleRows(off, p->val.rows());
      off += p->val.rows();
    }
  });
}

// ---- nonlinearities ----

inline Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  Mat v = x->val.unaryExpr(
      [](double t) { return 0.5 * t * (1.0 + std::erf(t * kInvSqrt2)); });
  return make_tensor(std::move(v), {x}, [](Node& n) {
    const Mat& t = n.parents[0]->val;
    Mat d = t.unaryExpr([](double u) {
      const double cdf = 0.5 * (1.0 + std::erf(u * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * u * u);
      return cdf + u * pdf;
    });
    n.parents[0]->grad += n.grad.cwiseProduct(d);
  });
}

// Row-wise layer normalization with learned gain/bias (1 x d each).
inline Tensor layer_norm_rows(const Tensor& x, const Tensor& gain,
                              const Tensor& bias, double eps = 1e-5) {
  const Eigen::Index rows = x->val.rows(), d = x->val.cols();
  Mat xhat(rows, d);
  Eigen::VectorXd inv_sigma(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mu = x->val.row(r).mean();
    const double var = (x->val.row(r).array() - mu).square().mean();
    const double is = 1.0 / std::sqrt(var + eps);
    inv_sigma(r) = is;
    xhat.row(r) = (x->val.row(r).array() - mu) * is;
  }
  Mat v(rows, d);
  for (Eigen::Index r = 0; r < rows; ++r) {
    v.row(r) = xhat.row(r).cwiseProduct(gain->val.row(0)) + bias->val.row(0);
  }
  return make_tensor(
      std::move(v), {x, gain, bias},
      [xhat = std::move(xhat), inv_sigma = std::move(inv_sigma)](Node& n) {
        const Eigen::Index rows = n.val.rows(), d = n.val.cols();
        Node& xn = *n.parents[0];
        Node& gn = *n.parents[1];
        Node& bn = *n.parents[2];
        for (Eigen::Index r = 0; r < rows; ++r) {
          const auto g = n.grad.row(r);
          gn.grad.row(0) += g.cwiseProduct(xhat.row(r));
          bn.grad.row(0) += g;
          Eigen::RowVectorXd dxhat = g.cwiseProduct(gn.val.row(0));
          const double m1 = dxhat.mean();
          const double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
          xn.grad.row(r) +=
              inv_sigma(r) *
              (dxhat.array() - m1 - xhat.row(r).array() * m2).matrix();
        }
        (void)d;
      });
}

// ---- softmax family ----

// Row-wise softmax of (x + add_mask); mask entries are 0 or large negatives.
inline Tensor softmax_rows(const Tensor& x, const Mat* add_mask = nullptr) {
  Mat z = x->val;
  if (add_mask != nullptr) z += *add_mask;
  Mat y(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - mx).exp();
    y.row(r) = e / e.sum();
  }
  return make_tensor(y, {x}, [y](Node& n) {
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = n.grad.row(r).dot(y.row(r));
      n.parents[0]->grad.row(r) +=
          y.row(r).cwiseProduct((n.grad.row(r).array() - dot).matrix());
    }
  });
}

// Row-wise log-softmax.
inline Tensor log_softmax_rows(const Tensor& x) {
  Mat y(x->val.rows(), x->val.cols());
  for (Eigen::Index r = 0; r < x->val.rows(); ++r) {
    const double mx = x->val.row(r).maxCoeff();
    const double lse =
        mx + std::log((x->val.row(r).array() - mx).exp().sum());
    y.row(r) = x->val.row(r).array() - lse;
  }
  return make_tensor(y, {x}, [y](Node& n) {
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double gsum = n.grad.row(r).sum();
      n.parents[0]->grad.row(r) +=
          n.grad.row(r) - gsum * y.row(r).array().exp().matrix();
    }
  });
}

// Row-wise log-sum-exp as an (n x 1) column; optionally excludes the
// diagonal entry of a square input from each row's sum.
inline Tensor logsumexp_rows(const Tensor& x, bool exclude_diag = false) {
  const Eigen::Index rows = x->val.rows(), cols = x->val.cols();
  if (exclude_diag && (rows != cols || rows < 2)) {
    throw std::invalid_argument(
        "logsumexp_rows: diagonal exclusion needs a square input, n >= 2");
  }
  Mat out(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (exclude_diag && c == r) continue;
      mx = std::max(mx, x->val(r, c));
    }
    double s = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (exclude_diag && c == r) continue;
      s += std::exp(x->val(r, c) - mx);
    }
    out(r, 0) = mx + std::log(s);
  }
  return make_tensor(out, {x}, [out, exclude_diag](Node& n) {
    const Mat& x = n.parents[0]->val;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (exclude_diag && c == r) continue;
        n.parents[0]->grad(r, c) +=
            n.grad(r, 0) * std::exp(x(r, c) - out(r, 0));
      }
    }
  });
}

// ---- reductions & indexing ----

// Sum of diagonal entries of a square matrix -> 1x1.
inline Tensor trace_sum(const Tensor& x) {
  Mat v(1, 1);
  v(0, 0) = x->val.diagonal().sum();
  return make_tensor(v, {x}, [](Node& n) {
    n.parents[0]->grad.diagonal().array() += n.grad(0, 0);
  });
}

// Sum of W .* x -> 1x1 for a constant weight matrix W.
inline Tensor weighted_sum(const Tensor& x, Mat w) {
  if (w.rows() != x->val.rows() || w.cols() != x->val.cols()) {
    throw std::invalid_argument("weighted_sum: shape mismatch");
  }
  Mat v(1, 1);
  v(0, 0) = x->val.cwiseProduct(w).sum();
  return make_tensor(std::move(v), {x}, [w = std::move(w)](Node& n) {
    n.parents[0]->grad += n.grad(0, 0) * w;
  });
}

inline Tensor sum_all(const Tensor& x) {
  Mat v(1, 1);
  v(0, 0) = x->val.sum();
  return make_tensor(std::move(v), {x}, [](Node& n) {
    n.parents[0]->grad.array() += n.grad(0, 0);
  });
}

// Embedding lookup: rows of E selected by ids.
inline Tensor gather_rows(const Tensor& table, std::vector<int> ids) {
  Mat v(static_cast<Eigen::Index>(ids.size()), table->val.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table->val.rows()) {
      throw std::out_of_range("gather_rows: id out of range");
    }
    v.row(static_cast<Eigen::Index>(i)) = table->val.row(ids[i]);
  }
  return make_tensor(std::move(v), {table}, [ids = std::move(ids)](Node& n) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      n.parents[0]->grad.row(ids[i]) +=
          n.grad.row(static_cast<Eigen::Index>(i));
    }
  });
}

// Weighted mean over rows: (w^T X) / sum(w) as a 1 x d row.
inline Tensor mean_rows_weighted(const Tensor& x, Eigen::VectorXd w) {
  if (w.size() != x->val.rows()) {
    throw std::invalid_argument("mean_rows_weighted: weight length mismatch");
  }
  const double total = w.sum();
  if (total <= 0.0) {
    throw std::invalid_argument("mean_rows_weighted: weights sum to zero");
  }
  Mat v = (w.transpose() * x->val) / total;
  return make_tensor(std::move(v), {x},
                     [w = std::move(w), total](Node& n) {
                       n.parents[0]->grad +=
                           (w / total) * n.grad.row(0);
                     });
}

// Row-wise L2 normalization to unit length.
inline Tensor l2_normalize_rows(const Tensor& x, double eps = 1e-12) {
  const Eigen::Index rows = x->val.rows();
  Eigen::VectorXd norms(rows);
  Mat v(rows, x->val.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    norms(r) = std::max(x->val.row(r).norm(), eps);
    v.row(r) = x->val.row(r) / norms(r);
  }
  return make_tensor(v, {x}, [v, norms = std::move(norms)](Node& n) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double dot = n.grad.row(r).dot(v.row(r));
      n.parents[0]->grad.row(r) +=
          (n.grad.row(r) - dot * v.row(r)) / norms(r);
    }
  });
}

}  // namespace senselang::ad
