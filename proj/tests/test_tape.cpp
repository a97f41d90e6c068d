#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "pocketdex/tape.hpp"

using namespace pocketdex;

namespace {

Tensor random_tensor(std::vector<size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = u(rng);
  return t;
}

// Central finite differences of a scalar-valued graph against the analytic
// gradients for every input tensor.
double max_grad_error(const std::vector<Tensor>& inputs,
                      const std::function<Tape::VarId(Tape&, const std::vector<Tape::VarId>&)>& build,
                      double eps = 1e-6) {
  Tape tape;
  std::vector<Tape::VarId> vars;
  for (const auto& t : inputs) vars.push_back(tape.leaf(t));
  Tape::VarId loss = build(tape, vars);
  tape.backward(loss);

  double worst = 0.0;
  for (size_t ti = 0; ti < inputs.size(); ++ti) {
    for (size_t i = 0; i < inputs[ti].size(); ++i) {
      auto eval = [&](double delta) {
        std::vector<Tensor> shifted = inputs;
        shifted[ti].data[i] += delta;
        Tape t2;
        std::vector<Tape::VarId> vs;
        for (const auto& t : shifted) vs.push_back(t2.constant(t));
        return t2.scalar(build(t2, vs));
      };
      double fd = (eval(eps) - eval(-eps)) / (2 * eps);
      double an = tape.grad(vars[ti]).data[i];
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("matmul add bias chain") {
  std::mt19937_64 rng(1);
  std::vector<Tensor> in = {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng),
                            random_tensor({2}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.sum_all(t.add_row_broadcast(t.matmul(v[0], v[1]), v[2]));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("elementwise ops") {
  std::mt19937_64 rng(2);
  std::vector<Tensor> in = {random_tensor({3, 3}, rng), random_tensor({3, 3}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.mean_all(t.mul(t.sub(v[0], v[1]), t.add(v[0], t.scale(v[1], 0.5))));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("transpose reshape gather") {
  std::mt19937_64 rng(3);
  std::vector<Tensor> in = {random_tensor({4, 3}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    Tape::VarId tr = t.transpose(v[0]);                // 3x4
    Tape::VarId rs = t.reshape(tr, {4, 3});
    Tape::VarId rows = t.row_gather(rs, {0, 2, 2});    // repeated row
    return t.sum_all(t.mul(rows, rows));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("col_range and concat_cols") {
  std::mt19937_64 rng(4);
  std::vector<Tensor> in = {random_tensor({3, 6}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    Tape::VarId a = t.col_range(v[0], 0, 2);
    Tape::VarId b = t.col_range(v[0], 2, 6);
    Tape::VarId joined = t.concat_cols({b, a});
    return t.mean_all(t.mul(joined, joined));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("layernorm") {
  std::mt19937_64 rng(5);
  std::vector<Tensor> in = {random_tensor({4, 6}, rng, 2.0), random_tensor({6}, rng),
                            random_tensor({6}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.mean_all(t.mul(t.layernorm(v[0], v[1], v[2]), v[0]));
  });
  CHECK(err < 1e-6);
}

TEST_CASE("gelu and softplus") {
  std::mt19937_64 rng(6);
  std::vector<Tensor> in = {random_tensor({5, 5}, rng, 2.0)};
  double e1 = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.sum_all(t.gelu(v[0]));
  });
  double e2 = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.sum_all(t.softplus(v[0]));
  });
  CHECK(e1 < 1e-7);
  CHECK(e2 < 1e-7);
}

TEST_CASE("softmax with additive mask") {
  std::mt19937_64 rng(7);
  Tensor bias({3, 3});
  bias.at(0, 2) = -1e9;
  bias.at(1, 2) = -1e9;
  bias.at(2, 2) = -1e9;
  std::vector<Tensor> in = {random_tensor({3, 3}, rng, 2.0), random_tensor({3, 3}, rng)};
  double err = max_grad_error(in, [bias](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.mean_all(t.mul(t.softmax_rows(v[0], &bias), v[1]));
  });
  CHECK(err < 1e-6);
}

TEST_CASE("softmax rows sum to one and masked column is zero") {
  std::mt19937_64 rng(8);
  Tensor bias({2, 4});
  bias.at(0, 3) = -1e9;
  bias.at(1, 3) = -1e9;
  Tape t;
  Tape::VarId a = t.leaf(random_tensor({2, 4}, rng, 3.0));
  const Tensor& y = t.val(t.softmax_rows(a, &bias));
  for (size_t i = 0; i < 2; ++i) {
    double row = 0.0;
    for (size_t j = 0; j < 4; ++j) row += y.at(i, j);
    CHECK(row == doctest::Approx(1.0));
    CHECK(y.at(i, 3) == 0.0);
  }
}

TEST_CASE("rbf_expand gradients flow to centers and widths") {
  std::mt19937_64 rng(9);
  Tensor d({6});
  for (size_t i = 0; i < 6; ++i) d.data[i] = 0.5 * static_cast<double>(i);
  Tensor mu({3}, {0.0, 1.0, 2.5});
  Tensor sigma({3}, {0.8, 1.0, 1.3});
  std::vector<Tensor> in = {mu, sigma, random_tensor({3, 2}, rng)};
  double err = max_grad_error(in, [d](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.sum_all(t.matmul(t.rbf_expand(d, v[0], v[1]), v[2]));
  });
  CHECK(err < 1e-6);
}

TEST_CASE("logsumexp diagonal and stack") {
  std::mt19937_64 rng(10);
  std::vector<Tensor> in = {random_tensor({1, 3}, rng), random_tensor({1, 3}, rng),
                            random_tensor({1, 3}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    Tape::VarId s = t.stack_rows({v[0], v[1], v[2]});
    Tape::VarId lse = t.logsumexp_rows(s);
    Tape::VarId diag = t.diagonal(s);
    return t.sum_all(t.sub(lse, diag));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("cross_entropy_mean") {
  std::mt19937_64 rng(11);
  std::vector<Tensor> in = {random_tensor({4, 7}, rng, 2.0)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.cross_entropy_mean(v[0], {1, 0, 6, 3});
  });
  CHECK(err < 1e-7);
}

TEST_CASE("masked_sq_error_mean") {
  std::mt19937_64 rng(12);
  Tensor target = random_tensor({3, 3}, rng);
  Tensor mask({3, 3});
  mask.at(0, 1) = 1;
  mask.at(1, 0) = 1;
  mask.at(2, 2) = 1;
  std::vector<Tensor> in = {random_tensor({3, 3}, rng)};
  double err = max_grad_error(in, [target, mask](Tape& t, const std::vector<Tape::VarId>& v) {
    return t.masked_sq_error_mean(v[0], target, mask);
  });
  CHECK(err < 1e-7);
}

TEST_CASE("l2_normalize_rows and select_entries_sum") {
  std::mt19937_64 rng(13);
  std::vector<Tensor> in = {random_tensor({3, 4}, rng), random_tensor({2, 4}, rng)};
  double err = max_grad_error(in, [](Tape& t, const std::vector<Tape::VarId>& v) {
    Tape::VarId cos = t.matmul(t.l2_normalize_rows(v[0]), t.transpose(t.l2_normalize_rows(v[1])));
    return t.select_entries_sum(cos, {{0, 0}, {2, 1}, {1, 0}});
  });
  CHECK(err < 1e-6);
}

TEST_CASE("grad accumulates when a node is reused") {
  Tape t;
  Tape::VarId x = t.leaf(Tensor({2}, {3.0, -1.0}));
  Tape::VarId y = t.sum_all(t.mul(x, x));  // sum x^2
  t.backward(y);
  CHECK(t.grad(x).data[0] == doctest::Approx(6.0));
  CHECK(t.grad(x).data[1] == doctest::Approx(-2.0));
}

TEST_CASE("backward requires scalar differentiable root") {
  Tape t;
  Tape::VarId c = t.constant(Tensor::scalar(1.0));
  CHECK_THROWS_AS(t.backward(c), InvalidArgument);
  Tape::VarId leaf = t.leaf(Tensor({2}, {1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(leaf), InvalidArgument);
}
