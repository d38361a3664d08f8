#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "tag/gradcheck.hpp"
#include "tag/hash.hpp"
#include "tag/optim.hpp"
#include "tag/params.hpp"
#include "tag/rng.hpp"
#include "tag/tensor.hpp"

using namespace tag;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = true) {
  std::vector<double> data(shape_numel(shape));
  for (auto& v : data) v = rng.normal();
  return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("construction and shape accounting") {
  Tensor z = Tensor::zeros({2, 3});
  CHECK(z.numel() == 6);
  CHECK(z.ndim() == 2);
  CHECK(z.dim(0) == 2);
  CHECK(z.dim(-1) == 3);
  for (double v : z.data()) CHECK(v == 0.0);

  Tensor f = Tensor::full({2}, 1.5);
  CHECK(f.at(0) == 1.5);
  CHECK(f.at(1) == 1.5);

  Tensor s = Tensor::scalar(-2.0);
  CHECK(s.item() == -2.0);

  CHECK_THROWS(Tensor::from_data({2, 2}, {1.0, 2.0, 3.0}));
}

TEST_CASE("matmul against hand-computed product") {
  Tensor a = Tensor::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::from_data({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor c = matmul(a, b);
  REQUIRE(c.shape() == Shape{2, 2});
  CHECK(c.at(0) == 58.0);
  CHECK(c.at(1) == 64.0);
  CHECK(c.at(2) == 139.0);
  CHECK(c.at(3) == 154.0);

  CHECK_THROWS_WITH_AS(matmul(a, a), doctest::Contains("[2,3]"), std::runtime_error);
}

TEST_CASE("elementwise ops and broadcast bias") {
  Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from_data({2, 2}, {10, 20, 30, 40});
  CHECK(add(a, b).at(3) == 44.0);
  CHECK(sub(b, a).at(0) == 9.0);
  CHECK(mul(a, b).at(2) == 90.0);
  CHECK(scale(a, -0.5).at(1) == -1.0);
  CHECK(sum(a).item() == 10.0);

  Tensor bias = Tensor::from_data({2}, {100, 200});
  Tensor r = add_rowwise(a, bias);
  CHECK(r.at(0) == 101.0);
  CHECK(r.at(1) == 202.0);
  CHECK(r.at(2) == 103.0);
  CHECK(r.at(3) == 204.0);

  Tensor t = transpose(a);
  CHECK(t.at(1) == 3.0);
  CHECK(t.at(2) == 2.0);
}

TEST_CASE("gelu matches the erf form") {
  Tensor x = Tensor::from_data({4}, {0.0, 1.0, -1.0, 2.5});
  Tensor y = gelu(x);
  CHECK(y.at(0) == 0.0);
  CHECK(y.at(1) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
  CHECK(y.at(2) == doctest::Approx(-0.15865525393145707).epsilon(1e-12));
  // gelu(x) - gelu(-x) == x for the erf form
  CHECK(y.at(1) - y.at(2) == doctest::Approx(1.0).epsilon(1e-12));
  double expect = 0.5 * 2.5 * (1.0 + std::erf(2.5 / std::sqrt(2.0)));
  CHECK(y.at(3) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("softmax values, normalization, shift invariance") {
  Tensor x = Tensor::from_data({1, 3}, {1, 2, 3});
  Tensor p = softmax(x);
  CHECK(p.at(0) == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(p.at(1) == doctest::Approx(0.24472847105479767).epsilon(1e-12));
  CHECK(p.at(2) == doctest::Approx(0.6652409557748219).epsilon(1e-12));
  CHECK(p.at(0) + p.at(1) + p.at(2) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor shifted = softmax(Tensor::from_data({1, 3}, {1001, 1002, 1003}));
  for (int i = 0; i < 3; ++i) CHECK(shifted.at(i) == doctest::Approx(p.at(i)).epsilon(1e-12));

  Rng rng(7);
  Tensor m = random_tensor({4, 5}, rng, false);
  Tensor pm = softmax(m);
  for (int r = 0; r < 4; ++r) {
    double row = 0;
    for (int c = 0; c < 5; ++c) row += pm.at(r * 5 + c);
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor p0 = softmax(m, 0);
  for (int c = 0; c < 5; ++c) {
    double col = 0;
    for (int r = 0; r < 4; ++r) col += p0.at(r * 5 + c);
    CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("masked softmax zeroes masked entries and survives full masking") {
  double inf = std::numeric_limits<double>::infinity();
  Tensor x = Tensor::from_data({2, 3}, {1, 2, 3, 5, 5, 5});
  Tensor mask = Tensor::from_data({2, 3}, {0, -inf, 0, -inf, -inf, -inf});
  Tensor p = masked_softmax(x, mask);
  CHECK(p.at(1) == 0.0);
  double z = std::exp(1.0) + std::exp(3.0);
  CHECK(p.at(0) == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
  CHECK(p.at(2) == doctest::Approx(std::exp(3.0) / z).epsilon(1e-12));
  // fully masked row comes out as zeros, not NaN
  CHECK(p.at(3) == 0.0);
  CHECK(p.at(4) == 0.0);
  CHECK(p.at(5) == 0.0);
  CHECK(p.all_finite());

  Tensor open = Tensor::zeros({2, 3});
  Tensor q = masked_softmax(x, open);
  Tensor plain = softmax(x);
  for (int i = 0; i < 6; ++i) CHECK(q.at(i) == doctest::Approx(plain.at(i)).epsilon(1e-12));
}

TEST_CASE("layer norm standardizes rows then applies affine") {
  Tensor x = Tensor::from_data({1, 4}, {1, 2, 3, 4});
  Tensor gain = Tensor::full({4}, 1.0);
  Tensor bias = Tensor::zeros({4});
  Tensor y = layer_norm(x, gain, bias);
  double istd = 1.0 / std::sqrt(1.25 + 1e-6);
  CHECK(y.at(0) == doctest::Approx(-1.5 * istd).epsilon(1e-12));
  CHECK(y.at(3) == doctest::Approx(1.5 * istd).epsilon(1e-12));

  double mean = 0, var = 0;
  for (int i = 0; i < 4; ++i) mean += y.at(i) / 4;
  for (int i = 0; i < 4; ++i) var += (y.at(i) - mean) * (y.at(i) - mean) / 4;
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(var == doctest::Approx(1.0).epsilon(1e-4));

  Tensor g2 = Tensor::from_data({4}, {2, 2, 2, 2});
  Tensor b2 = Tensor::from_data({4}, {1, 1, 1, 1});
  Tensor y2 = layer_norm(x, g2, b2);
  CHECK(y2.at(0) == doctest::Approx(2 * y.at(0) + 1).epsilon(1e-12));
}

TEST_CASE("slices and concats invert each other") {
  Rng rng(11);
  Tensor a = random_tensor({5, 4}, rng, false);
  Tensor top = slice_rows(a, 0, 2);
  Tensor bottom = slice_rows(a, 2, 5);
  Tensor back = concat_rows({top, bottom});
  REQUIRE(back.shape() == a.shape());
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(back.at(i) == a.at(i));

  Tensor left = slice_cols(a, 0, 1);
  Tensor right = slice_cols(a, 1, 4);
  Tensor back2 = concat_cols({left, right});
  for (std::int64_t i = 0; i < a.numel(); ++i) CHECK(back2.at(i) == a.at(i));

  CHECK_THROWS(slice_rows(a, 3, 2));
  CHECK_THROWS(slice_cols(a, 0, 9));
}

TEST_CASE("gather accumulates gradients over repeated indices") {
  Tensor table = Tensor::from_data({3, 2}, {1, 2, 3, 4, 5, 6}, true);
  Tensor picked = gather_rows(table, {2, 0, 2});
  REQUIRE(picked.shape() == Shape{3, 2});
  CHECK(picked.at(0) == 5.0);
  CHECK(picked.at(2) == 1.0);
  CHECK(picked.at(4) == 5.0);

  backward(sum(picked));
  auto g = table.grad();
  CHECK(g[0] == 1.0);  // row 0 picked once
  CHECK(g[2] == 0.0);  // row 1 never picked
  CHECK(g[4] == 2.0);  // row 2 picked twice
  CHECK(g[5] == 2.0);

  CHECK_THROWS(gather_rows(table, {3}));
}

TEST_CASE("dropout scales survivors and is off outside training") {
  Rng rng(5);
  Tensor x = Tensor::full({1000}, 1.0);
  Tensor kept = dropout(x, 0.5, rng, false);
  for (std::int64_t i = 0; i < 1000; ++i) CHECK(kept.at(i) == 1.0);
  Tensor none = dropout(x, 0.0, rng, true);
  for (std::int64_t i = 0; i < 1000; ++i) CHECK(none.at(i) == 1.0);

  Rng r1(42), r2(42);
  Tensor d1 = dropout(x, 0.5, r1, true);
  Tensor d2 = dropout(x, 0.5, r2, true);
  int zeros = 0;
  for (std::int64_t i = 0; i < 1000; ++i) {
    CHECK(d1.at(i) == d2.at(i));  // same stream, same pattern
    if (d1.at(i) == 0.0) {
      ++zeros;
    } else {
      CHECK(d1.at(i) == doctest::Approx(2.0).epsilon(1e-12));
    }
  }
  CHECK(zeros > 400);
  CHECK(zeros < 600);
}

TEST_CASE("bce with logits matches the stable closed form") {
  auto ref = [](double x, double t) {
    return std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
  };
  Tensor logits = Tensor::from_data({4}, {10.0, -10.0, 0.0, 2.0});
  std::vector<double> targets = {1, 0, 0, 1};
  std::vector<double> valid = {1, 1, 1, 1};
  Tensor loss = bce_with_logits_mean(logits, targets, valid);
  double expect = (ref(10, 1) + ref(-10, 0) + ref(0, 0) + ref(2, 1)) / 4.0;
  CHECK(loss.item() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(ref(10, 1) == doctest::Approx(4.5398899216870535e-05).epsilon(1e-12));

  // huge logits stay finite
  Tensor big = Tensor::from_data({2}, {1000.0, -1000.0});
  Tensor big_loss = bce_with_logits_mean(big, {0, 1}, {1, 1});
  CHECK(big_loss.item() == doctest::Approx(1000.0).epsilon(1e-12));

  // invalid entries are excluded from the mean
  Tensor part = bce_with_logits_mean(logits, targets, {1, 0, 0, 1});
  CHECK(part.item() == doctest::Approx((ref(10, 1) + ref(2, 1)) / 2.0).epsilon(1e-14));
}

TEST_CASE("backward accumulates through shared subexpressions") {
  Tensor x = Tensor::from_data({3}, {1, 2, 3}, true);
  Tensor y = mul(x, x);
  Tensor z = add(y, y);
  backward(sum(z));
  auto g = x.grad();
  CHECK(g[0] == 4.0);
  CHECK(g[1] == 8.0);
  CHECK(g[2] == 12.0);

  x.zero_grad();
  backward(sum(mul(x, x)));
  CHECK(x.grad()[1] == 4.0);
}

TEST_CASE("detach cuts the graph and no-grad mode records nothing") {
  Tensor x = Tensor::from_data({2}, {1, 2}, true);
  Tensor d2 = x.detach();
  CHECK_FALSE(d2.requires_grad());
  CHECK(d2.at(1) == 2.0);
  Tensor y = mul(d2, d2);
  CHECK_FALSE(y.requires_grad());

  {
    NoGradGuard guard;
    CHECK_FALSE(grad_enabled());
    Tensor z = mul(x, x);
    CHECK_FALSE(z.requires_grad());
  }
  CHECK(grad_enabled());
}

TEST_CASE("finite differences agree with backward for every op") {
  Rng rng(99);
  GradCheckOptions opt;

  SUBCASE("matmul chain") {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    auto f = [&] { return sum(matmul(a, b)); };
    CHECK(finite_difference_check(f, {{"a", a}, {"b", b}}, opt).pass(1e-6));
  }
  SUBCASE("transpose and scale") {
    Tensor a = random_tensor({3, 4}, rng);
    Tensor w = random_tensor({3, 4}, rng, false);
    auto f = [&] { return sum(mul(transpose(transpose(a)), w)); };
    CHECK(finite_difference_check(f, a, opt).pass(1e-6));
  }
  SUBCASE("gelu") {
    Tensor a = random_tensor({4, 4}, rng);
    auto f = [&] { return sum(gelu(a)); };
    CHECK(finite_difference_check(f, a, opt).pass(1e-6));
  }
  SUBCASE("softmax weighted") {
    Tensor a = random_tensor({3, 5}, rng);
    Tensor w = random_tensor({3, 5}, rng, false);
    auto f = [&] { return sum(mul(softmax(a), w)); };
    CHECK(finite_difference_check(f, a, opt).pass(1e-6));
  }
  SUBCASE("masked softmax weighted") {
    double inf = std::numeric_limits<double>::infinity();
    Tensor a = random_tensor({3, 4}, rng);
    Tensor mask = Tensor::from_data({3, 4}, {0, 0, -inf, 0, -inf, 0, 0, 0, 0, 0, 0, -inf});
    Tensor w = random_tensor({3, 4}, rng, false);
    auto f = [&] { return sum(mul(masked_softmax(a, mask), w)); };
    CHECK(finite_difference_check(f, a, opt).pass(1e-6));
  }
  SUBCASE("layer norm in all three slots") {
    Tensor x = random_tensor({3, 6}, rng);
    Tensor gain = random_tensor({6}, rng);
    Tensor bias = random_tensor({6}, rng);
    Tensor w = random_tensor({3, 6}, rng, false);
    auto f = [&] { return sum(mul(layer_norm(x, gain, bias), w)); };
    CHECK(finite_difference_check(f, {{"x", x}, {"gain", gain}, {"bias", bias}}, opt).pass(1e-6));
  }
  SUBCASE("slices concats and rowwise bias") {
    Tensor a = random_tensor({4, 6}, rng);
    Tensor bias = random_tensor({3}, rng);
    auto f = [&] {
      Tensor left = slice_cols(a, 0, 3);
      Tensor right = slice_cols(a, 3, 6);
      Tensor stacked = concat_rows({slice_rows(add_rowwise(left, bias), 0, 2), right});
      return sum(mul(stacked, stacked));
    };
    CHECK(finite_difference_check(f, {{"a", a}, {"bias", bias}}, opt).pass(1e-6));
  }
  SUBCASE("gather with duplicates") {
    Tensor table = random_tensor({5, 3}, rng);
    auto f = [&] {
      Tensor g = gather_rows(table, {1, 4, 1, 0});
      return sum(mul(g, g));
    };
    CHECK(finite_difference_check(f, table, opt).pass(1e-6));
  }
  SUBCASE("bce with logits") {
    Tensor logits = random_tensor({8}, rng);
    std::vector<double> targets = {1, 0, 1, 1, 0, 0, 1, 0};
    std::vector<double> valid = {1, 1, 0, 1, 1, 1, 0, 1};
    auto f = [&] { return bce_with_logits_mean(logits, targets, valid); };
    CHECK(finite_difference_check(f, logits, opt).pass(1e-6));
  }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  Rng rng(3);
  ParamRegistry reg;
  reg.add("w", random_tensor({4, 3}, rng));
  reg.add("b", random_tensor({3}, rng));
  reg.add("scalarish", Tensor::from_data({1}, {0.1 + 0.2}, true));

  auto path = temp_path("tagqa_ckpt_test.bin");
  reg.save(path.string());

  std::vector<double> original(reg.get("w").data().begin(), reg.get("w").data().end());
  for (auto& v : reg.get("w").mutable_data()) v = -99.0;
  reg.load(path.string());
  auto restored = reg.get("w").data();
  for (size_t i = 0; i < original.size(); ++i) CHECK(restored[i] == original[i]);

  auto path2 = temp_path("tagqa_ckpt_test2.bin");
  reg.save(path2.string());
  CHECK(sha256_file_hex(path.string()) == sha256_file_hex(path2.string()));

  SUBCASE("shape mismatch rejected") {
    ParamRegistry other;
    other.add("w", Tensor::zeros({4, 3}, true));
    other.add("b", Tensor::zeros({4}, true));
    other.add("scalarish", Tensor::zeros({1}, true));
    CHECK_THROWS_WITH_AS(other.load(path.string()), doctest::Contains("b"), std::runtime_error);
  }
  SUBCASE("missing and extra names rejected") {
    ParamRegistry fewer;
    fewer.add("w", Tensor::zeros({4, 3}, true));
    CHECK_THROWS(fewer.load(path.string()));

    ParamRegistry renamed;
    renamed.add("w", Tensor::zeros({4, 3}, true));
    renamed.add("b", Tensor::zeros({3}, true));
    renamed.add("other", Tensor::zeros({1}, true));
    CHECK_THROWS_WITH_AS(renamed.load(path.string()), doctest::Contains("scalarish"),
                         std::runtime_error);
  }

  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("staircase schedule steps down at each boundary") {
  LrSchedule sched;
  sched.base_lr = 1e-3;
  sched.decay_factor = 0.1;
  sched.decay_steps = {10, 20};
  CHECK(sched.at(0) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(sched.at(9) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(sched.at(10) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(sched.at(19) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(sched.at(20) == doctest::Approx(1e-5).epsilon(1e-15));
  CHECK(sched.at(1000) == doctest::Approx(1e-5).epsilon(1e-15));
}

TEST_CASE("adam takes the hand-computed first step") {
  ParamRegistry reg;
  Tensor& p = reg.add("p", Tensor::from_data({1}, {5.0}, true));
  AdamState state(reg);
  LrSchedule sched;
  sched.base_lr = 0.01;

  backward(scale(p, 3.0));  // constant gradient 3
  adam_step(reg, state, sched, 0);
  // bias-corrected m=g, v=g^2, so the step is lr * g / (|g| + eps)
  double expect = 5.0 - 0.01 * 3.0 / (3.0 + 1e-8);
  CHECK(p.at(0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(state.step_count == 1);
}

TEST_CASE("adam converges on a quadratic") {
  ParamRegistry reg;
  Tensor& p = reg.add("p", Tensor::from_data({1}, {-4.0}, true));
  AdamState state(reg);
  LrSchedule sched;
  sched.base_lr = 0.1;
  for (int i = 0; i < 400; ++i) {
    reg.zero_all_grads();
    Tensor diff = add(p, Tensor::scalar(-3.0));
    backward(mul(diff, diff));
    adam_step(reg, state, sched, i);
  }
  CHECK(p.at(0) == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("adam aborts on non-finite gradients naming the parameter") {
  ParamRegistry reg;
  Tensor& p = reg.add("embed.word", Tensor::from_data({2}, {1.0, 2.0}, true));
  AdamState state(reg);
  LrSchedule sched;
  backward(sum(mul(p, Tensor::from_data({2}, {1.0, std::nan("")}))));
  CHECK_THROWS_WITH_AS(adam_step(reg, state, sched, 7), doctest::Contains("embed.word"),
                       std::runtime_error);
}
