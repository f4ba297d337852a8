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

#include <catch2/catch_amalgamated.hpp>

#include "senselang/autodiff.hpp"
#include "senselang/common.hpp"

namespace ad = senselang::ad;
using senselang::Rng;

namespace {

ad::Mat random_mat(Rng& rng, int rows, int cols, double scale = 1.0) {
  ad::Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.gaussian();
  }
  return m;
}

// Central-difference gradient check against the analytic backward pass.
// `f` maps freshly built leaf tensors to a 1x1 loss tensor.
template <typename F>
void check_grads(std::vector<ad::Mat> inputs, F&& f, double tol = 1e-6) {
  std::vector<ad::Tensor> leaves;
  for (const auto& m : inputs) leaves.push_back(ad::make_tensor(m));
  auto loss = f(leaves);
  REQUIRE(loss->val.rows() == 1);
  REQUIRE(loss->val.cols() == 1);
  ad::backward(loss);

  const double h = 1e-6;
  for (std::size_t li = 0; li < inputs.size(); ++li) {
    for (Eigen::Index r = 0; r < inputs[li].rows(); ++r) {
      for (Eigen::Index c = 0; c < inputs[li].cols(); ++c) {
        auto eval_at = [&](double delta) {
          std::vector<ad::Tensor> fresh;
          for (std::size_t i = 0; i < inputs.size(); ++i) {
            ad::Mat m = inputs[i];
            if (i == li) m(r, c) += delta;
            fresh.push_back(ad::make_tensor(m));
          }
          return f(fresh)->val(0, 0);
        };
        const double fd = (eval_at(h) - eval_at(-h)) / (2.0 * h);
        const double analytic = leaves[li]->grad(r, c);
        const double err =
            std::abs(fd - analytic) / std::max(1.0, std::abs(fd));
        INFO("leaf " << li << " entry (" << r << "," << c << "): fd=" << fd
                     << " analytic=" << analytic);
        REQUIRE(err < tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("elementwise and linear op gradients match finite differences") {
  Rng rng(11);
  const ad::Mat a = random_mat(rng, 3, 4);
  const ad::Mat b = random_mat(rng, 3, 4);
  const ad::Mat w = random_mat(rng, 3, 4);

  check_grads({a, b}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::add(t[0], t[1]), w);
  });
  check_grads({a, b}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::sub(t[0], t[1]), w);
  });
  check_grads({a}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::scale(t[0], -2.5), w);
  });
  check_grads({a, b}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::hadamard(t[0], t[1]), w);
  });
  check_grads({a}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::hadamard_const(t[0], b), w);
  });
  check_grads({a}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::transpose(t[0]), w.transpose());
  });
}

TEST_CASE("matmul family gradients match finite differences") {
  Rng rng(12);
  const ad::Mat a = random_mat(rng, 3, 5);
  const ad::Mat b = random_mat(rng, 5, 2);
  const ad::Mat b2 = random_mat(rng, 4, 5);
  const ad::Mat row = random_mat(rng, 1, 5);
  const ad::Mat w32 = random_mat(rng, 3, 2);
  const ad::Mat w34 = random_mat(rng, 3, 4);
  const ad::Mat w35 = random_mat(rng, 3, 5);

  check_grads({a, b}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::matmul(t[0], t[1]), w32);
  });
  check_grads({a, b2}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::matmul_nt(t[0], t[1]), w34);
  });
  check_grads({a, row}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::add_rowvec(t[0], t[1]), w35);
  });
}

TEST_CASE("slicing and concatenation gradients match finite differences") {
  Rng rng(13);
  const ad::Mat a = random_mat(rng, 5, 6);
  const ad::Mat b = random_mat(rng, 5, 3);
  const ad::Mat c = random_mat(rng, 2, 6);
  const ad::Mat w23 = random_mat(rng, 2, 3);
  const ad::Mat w52 = random_mat(rng, 5, 2);
  const ad::Mat w59 = random_mat(rng, 5, 9);
  const ad::Mat w76 = random_mat(rng, 7, 6);

  check_grads({a}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(
        ad::slice_cols(ad::slice_rows(t[0], 1, 2), 2, 3), w23);
  });
  check_grads({a}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::slice_cols(t[0], 4, 2), w52);
  });
  check_grads({a, b}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::concat_cols({t[0], t[1]}), w59);
  });
  check_grads({a, c}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::concat_rows({t[0], t[1]}), w76);
  });
}

TEST_CASE("gelu values and gradients") {
  auto x = ad::make_tensor((ad::Mat(1, 3) << 0.0, 1.0, -2.0).finished());
  auto y = ad::gelu(x);
  CHECK(y->val(0, 0) == 0.0);
  // x * Phi(x) at x = 1.
  CHECK(y->val(0, 1) == Catch::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(y->val(0, 2) < 0.0);

  Rng rng(14);
  const ad::Mat a = random_mat(rng, 3, 4, 1.5);
  const ad::Mat w = random_mat(rng, 3, 4);
  check_grads({a}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::gelu(t[0]), w);
  });
}

TEST_CASE("layer norm normalizes rows and gradients check out") {
  Rng rng(15);
  const ad::Mat x = random_mat(rng, 4, 6, 2.0);
  const ad::Mat g = random_mat(rng, 1, 6);
  const ad::Mat b = random_mat(rng, 1, 6);
  const ad::Mat ones = ad::Mat::Ones(1, 6);
  const ad::Mat zeros = ad::Mat::Zero(1, 6);
  const ad::Mat w = random_mat(rng, 4, 6);

  auto normed = ad::layer_norm_rows(ad::make_tensor(x), ad::make_tensor(ones),
                                    ad::make_tensor(zeros));
  for (int r = 0; r < 4; ++r) {
    CHECK(normed->val.row(r).mean() == Catch::Approx(0.0).margin(1e-12));
    const double var =
        normed->val.row(r).array().square().mean();
    CHECK(var == Catch::Approx(1.0).margin(1e-4));  // eps shifts it slightly
  }
  check_grads({x, g, b}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::layer_norm_rows(t[0], t[1], t[2]), w);
  }, 5e-6);
}

TEST_CASE("softmax family values") {
  auto x = ad::make_tensor((ad::Mat(1, 2) << 0.0, 1.0).finished());
  auto y = ad::softmax_rows(x);
  const double e = std::exp(1.0);
  CHECK(y->val(0, 0) == Catch::Approx(1.0 / (1.0 + e)).epsilon(1e-12));
  CHECK(y->val(0, 1) == Catch::Approx(e / (1.0 + e)).epsilon(1e-12));
  CHECK(y->val.row(0).sum() == Catch::Approx(1.0).epsilon(1e-12));

  auto ls = ad::log_softmax_rows(x);
  CHECK(ls->val(0, 0) == Catch::Approx(std::log(1.0 / (1.0 + e))).epsilon(1e-12));

  auto lse = ad::logsumexp_rows(ad::make_tensor(
      (ad::Mat(1, 3) << 1.0, 2.0, 3.0).finished()));
  CHECK(lse->val(0, 0) ==
        Catch::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0)))
            .epsilon(1e-12));

  // Diagonal exclusion drops exactly the diagonal term.
  ad::Mat sq = (ad::Mat(2, 2) << 5.0, 1.0, 2.0, 7.0).finished();
  auto excl = ad::logsumexp_rows(ad::make_tensor(sq), true);
  CHECK(excl->val(0, 0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(excl->val(1, 0) == Catch::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(ad::logsumexp_rows(x, true), std::invalid_argument);
}

TEST_CASE("softmax family gradients match finite differences") {
  Rng rng(16);
  const ad::Mat x = random_mat(rng, 3, 4);
  const ad::Mat sq = random_mat(rng, 4, 4);
  const ad::Mat w34 = random_mat(rng, 3, 4);
  const ad::Mat w41 = random_mat(rng, 4, 1);
  ad::Mat mask = ad::Mat::Zero(3, 4);
  mask(0, 3) = -1e30;
  mask(2, 0) = -1e30;

  check_grads({x}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::softmax_rows(t[0]), w34);
  });
  check_grads({x}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::softmax_rows(t[0], &mask), w34);
  });
  check_grads({x}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::log_softmax_rows(t[0]), w34);
  });
  check_grads({sq}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::logsumexp_rows(t[0], false), w41);
  });
  check_grads({sq}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::logsumexp_rows(t[0], true), w41);
  });
}

TEST_CASE("reduction and indexing gradients match finite differences") {
  Rng rng(17);
  const ad::Mat sq = random_mat(rng, 4, 4);
  const ad::Mat table = random_mat(rng, 6, 3);
  const ad::Mat x = random_mat(rng, 5, 3);
  const ad::Mat w13 = random_mat(rng, 1, 3);
  const ad::Mat w33 = random_mat(rng, 3, 3);
  const ad::Mat w53 = random_mat(rng, 5, 3);
  Eigen::VectorXd pool = Eigen::VectorXd::Zero(5);
  pool << 1.0, 0.0, 1.0, 1.0, 0.0;

  check_grads({sq}, [&](const std::vector<ad::Tensor>& t) {
    return ad::trace_sum(t[0]);
  });
  check_grads({x}, [&](const std::vector<ad::Tensor>& t) {
    return ad::sum_all(t[0]);
  });
  // Repeated ids exercise gradient scatter-add.
  check_grads({table}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::gather_rows(t[0], {2, 0, 2}), w33);
  });
  check_grads({x}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::mean_rows_weighted(t[0], pool), w13);
  });
  check_grads({x}, [&](const std::vector<ad::Tensor>& t) {
    return ad::weighted_sum(ad::l2_normalize_rows(t[0]), w53);
  });
}

TEST_CASE("backward accumulates through shared nodes") {
  auto x = ad::make_tensor((ad::Mat(2, 2) << 1.0, 2.0, 3.0, 4.0).finished());
  auto y = ad::add(x, x);
  auto loss = ad::sum_all(y);
  ad::backward(loss);
  CHECK(x->grad.isApprox(ad::Mat::Constant(2, 2, 2.0)));

  // Second backward on a fresh graph over the same leaf resets grads.
  auto loss2 = ad::sum_all(x);
  ad::backward(loss2);
  CHECK(x->grad.isApprox(ad::Mat::Constant(2, 2, 1.0)));
}

TEST_CASE("backward handles deep chains without recursion") {
  auto x = ad::make_tensor(ad::Mat::Ones(1, 1));
  ad::Tensor t = x;
  for (int i = 0; i < 20000; ++i) t = ad::scale(t, 1.0);
  ad::backward(t);
  CHECK(x->grad(0, 0) == 1.0);
}

TEST_CASE("backward rejects non-scalar roots") {
  auto x = ad::make_tensor(ad::Mat::Ones(2, 2));
  CHECK_THROWS_AS(ad::backward(x), std::invalid_argument);
}
