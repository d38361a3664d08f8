#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "tag/gradcheck.hpp"
#include "tag/transformer.hpp"

using namespace tag;

namespace {

Tensor padded_block(std::int64_t cap, std::int64_t d, std::int64_t used, Rng& rng) {
  std::vector<double> data(static_cast<size_t>(cap * d), 0.0);
  for (std::int64_t i = 0; i < used * d; ++i) data[static_cast<size_t>(i)] = rng.normal();
  return Tensor::from_data({cap, d}, std::move(data));
}

FeatureBundle random_bundle(const ModelConfig& c, const ValidLengths& used, Rng& rng) {
  FeatureBundle b;
  b.f_ans = padded_block(c.k_cap, c.d, used.k_used, rng);
  b.f_obj = padded_block(c.m_cap, c.d, used.m_used, rng);
  b.f_ocr = padded_block(c.n_cap, c.d, used.n_used, rng);
  b.k_used = used.k_used;
  b.m_used = used.m_used;
  b.n_used = used.n_used;
  for (int j = 0; j < used.n_used; ++j) b.ocr_texts.push_back("tok" + std::to_string(j));
  return b;
}

Tensor with_entry(const Tensor& t, std::int64_t flat, double value) {
  std::vector<double> data(t.data().begin(), t.data().end());
  data[static_cast<size_t>(flat)] = value;
  return Tensor::from_data(t.shape(), std::move(data));
}

bool rows_equal(const Tensor& a, const Tensor& b, std::int64_t row) {
  for (std::int64_t c = 0; c < a.dim(1); ++c)
    if (a.at(row * a.dim(1) + c) != b.at(row * b.dim(1) + c)) return false;
  return true;
}

}  // namespace

TEST_CASE("fusion parameters register under layer-indexed names") {
  ModelConfig c = test_helpers::tiny_config();
  c.layers = 2;
  ParamRegistry reg;
  Rng rng(3);
  TransformerParams params(c, rng, reg);
  CHECK(params.layers.size() == 2);
  for (const char* name : {"fusion.layer0.attn.q.weight", "fusion.layer0.attn.out.bias",
                           "fusion.layer0.ln1.gain", "fusion.layer0.ffw.in.weight",
                           "fusion.layer1.ffw.out.bias", "fusion.layer1.ln2.bias",
                           "fusion.final_ln.gain", "fusion.final_ln.bias"})
    CHECK(reg.contains(name));
  CHECK(reg.size() == 2 * 16 + 2);
  CHECK(reg.get("fusion.layer0.ln1.gain").at(0) == 1.0);
  CHECK(reg.get("fusion.layer0.ln1.bias").at(0) == 0.0);
  CHECK(reg.get("fusion.layer1.ffw.in.weight").shape() == Shape{c.d, 4 * c.d});
}

TEST_CASE("mask matches an independently built visibility table") {
  ModelConfig c = test_helpers::tiny_config();
  const int K = c.k_cap, M = c.m_cap, N = c.n_cap, T = c.t_cap;
  const int S = K + M + N + T;

  for (ValidLengths used : std::vector<ValidLengths>{
           {3, 2, 4, 5}, {K, M, N, T}, {1, 0, 0, 1}, {0, 0, 3, 2}, {5, 1, 2, 0}}) {
    Tensor mask = build_mask(used, c);
    REQUIRE(mask.shape() == Shape{S, S});

    auto context_valid = [&](int p) {
      if (p < K) return p < used.k_used;
      if (p < K + M) return p - K < used.m_used;
      if (p < K + M + N) return p - K - M < used.n_used;
      return false;
    };
    for (int r = 0; r < S; ++r) {
      for (int col = 0; col < S; ++col) {
        bool visible;
        if (r >= K + M + N) {
          int t = r - K - M - N;
          bool row_alive = t < used.t_used;
          bool col_decode_prefix = col >= K + M + N && col - K - M - N <= t;
          visible = row_alive && (context_valid(col) || col_decode_prefix);
        } else {
          visible = context_valid(r) && context_valid(col);
        }
        double v = mask.at(static_cast<std::int64_t>(r) * S + col);
        if (visible) {
          CHECK(v == 0.0);
        } else {
          CHECK(v == -std::numeric_limits<double>::infinity());
        }
      }
    }
  }
  CHECK_THROWS(build_mask({K + 1, 0, 0, 0}, c));
  CHECK_THROWS(build_mask({0, 0, -1, 0}, c));
}

TEST_CASE("joint sequence stacks blocks at fixed offsets") {
  ModelConfig c = test_helpers::tiny_config();
  Rng rng(17);
  FeatureBundle b = random_bundle(c, {2, 1, 3, 0}, rng);
  Tensor decode = Tensor::full({c.t_cap, c.d}, 7.5);
  Tensor joint = build_joint_sequence(b, decode, c);
  REQUIRE(joint.shape() == Shape{c.joint_len(), c.d});
  CHECK(joint.at(0) == b.f_ans.at(0));
  CHECK(joint.at(static_cast<std::int64_t>(c.k_cap) * c.d) == b.f_obj.at(0));
  CHECK(joint.at(static_cast<std::int64_t>(c.k_cap + c.m_cap) * c.d) == b.f_ocr.at(0));
  CHECK(joint.at(static_cast<std::int64_t>(c.k_cap + c.m_cap + c.n_cap) * c.d) == 7.5);

  FeatureBundle bad = b;
  bad.f_obj = Tensor::zeros({c.m_cap + 1, c.d});
  CHECK_THROWS_WITH_AS(build_joint_sequence(bad, decode, c), doctest::Contains("F_obj"),
                       std::runtime_error);
}

TEST_CASE("forward is deterministic and ignores what the mask hides") {
  ModelConfig c = test_helpers::tiny_config();
  ParamRegistry reg;
  Rng prng(23);
  TransformerParams params(c, prng, reg);

  ValidLengths used{4, 2, 3, 3};
  Rng rng(29);
  FeatureBundle b = random_bundle(c, used, rng);
  Tensor decode = padded_block(c.t_cap, c.d, used.t_used, rng);
  Tensor joint = build_joint_sequence(b, decode, c);
  Tensor mask = build_mask(used, c);

  Tensor out1 = transformer_forward(joint, mask, params, c);
  Tensor out2 = transformer_forward(joint, mask, params, c);
  REQUIRE(out1.shape() == Shape{c.joint_len(), c.d});
  CHECK(out1.all_finite());
  for (std::int64_t i = 0; i < out1.numel(); ++i) CHECK(out1.at(i) == out2.at(i));

  const int K = c.k_cap, M = c.m_cap, N = c.n_cap;
  SUBCASE("padding rows cannot leak into valid positions") {
    // poke a padded answer row and a padded ocr row
    for (std::int64_t victim : {static_cast<std::int64_t>(used.k_used),
                                static_cast<std::int64_t>(K + M + used.n_used)}) {
      Tensor poked = with_entry(joint, victim * c.d + 1, 123.0);
      Tensor out3 = transformer_forward(poked, mask, params, c);
      for (int r = 0; r < used.k_used; ++r) CHECK(rows_equal(out1, out3, r));
      for (int r = 0; r < used.m_used; ++r) CHECK(rows_equal(out1, out3, K + r));
      for (int r = 0; r < used.n_used; ++r) CHECK(rows_equal(out1, out3, K + M + r));
      for (int t = 0; t < used.t_used; ++t) CHECK(rows_equal(out1, out3, K + M + N + t));
      CHECK_FALSE(rows_equal(out1, out3, victim));  // its own row still transforms
    }
  }
  SUBCASE("decode steps are causal and invisible to context") {
    const std::int64_t step1 = K + M + N + 1;
    Tensor poked = with_entry(joint, step1 * c.d + 2, 55.0);
    Tensor out3 = transformer_forward(poked, mask, params, c);
    // context rows and step 0 can't see step 1
    for (int r = 0; r < used.k_used; ++r) CHECK(rows_equal(out1, out3, r));
    for (int r = 0; r < used.m_used; ++r) CHECK(rows_equal(out1, out3, K + r));
    for (int r = 0; r < used.n_used; ++r) CHECK(rows_equal(out1, out3, K + M + r));
    CHECK(rows_equal(out1, out3, K + M + N + 0));
    // step 1 and its successors do see it
    CHECK_FALSE(rows_equal(out1, out3, K + M + N + 1));
    CHECK_FALSE(rows_equal(out1, out3, K + M + N + 2));
  }
}

TEST_CASE("ocr block is permutation equivariant") {
  ModelConfig c = test_helpers::tiny_config();
  ParamRegistry reg;
  Rng prng(31);
  TransformerParams params(c, prng, reg);

  ValidLengths used{3, 2, 4, 2};
  Rng rng(37);
  FeatureBundle b = random_bundle(c, used, rng);
  Tensor decode = padded_block(c.t_cap, c.d, used.t_used, rng);
  Tensor mask = build_mask(used, c);
  Tensor out = transformer_forward(build_joint_sequence(b, decode, c), mask, params, c);

  // swap ocr rows 1 and 2
  std::vector<double> data(b.f_ocr.data().begin(), b.f_ocr.data().end());
  for (std::int64_t col = 0; col < c.d; ++col)
    std::swap(data[static_cast<size_t>(1 * c.d + col)], data[static_cast<size_t>(2 * c.d + col)]);
  FeatureBundle swapped = b;
  swapped.f_ocr = Tensor::from_data({c.n_cap, c.d}, std::move(data));
  Tensor out_sw = transformer_forward(build_joint_sequence(swapped, decode, c), mask, params, c);

  const int K = c.k_cap, M = c.m_cap;
  auto close_rows = [&](std::int64_t ra, std::int64_t rb) {
    for (std::int64_t col = 0; col < c.d; ++col)
      CHECK(out.at(ra * c.d + col) == doctest::Approx(out_sw.at(rb * c.d + col)).epsilon(1e-9));
  };
  for (int r = 0; r < used.k_used; ++r) close_rows(r, r);
  close_rows(K + M + 0, K + M + 0);
  close_rows(K + M + 1, K + M + 2);  // outputs moved with their rows
  close_rows(K + M + 2, K + M + 1);
  close_rows(K + M + 3, K + M + 3);
  for (int t = 0; t < used.t_used; ++t) {
    std::int64_t r = K + M + c.n_cap + t;
    close_rows(r, r);
  }
}

TEST_CASE("dropout perturbs training forwards only") {
  ModelConfig c = test_helpers::tiny_config();
  c.dropout = 0.2;
  ParamRegistry reg;
  Rng prng(41);
  TransformerParams params(c, prng, reg);
  ValidLengths used{4, 2, 3, 2};
  Rng rng(43);
  Tensor joint = build_joint_sequence(random_bundle(c, used, rng),
                                      padded_block(c.t_cap, c.d, used.t_used, rng), c);
  Tensor mask = build_mask(used, c);

  Rng d1(7), d2(7), d3(8);
  Tensor eval = transformer_forward(joint, mask, params, c);
  Tensor eval2 = transformer_forward(joint, mask, params, c, &d1, false);
  for (std::int64_t i = 0; i < eval.numel(); ++i) CHECK(eval.at(i) == eval2.at(i));

  Rng d4(7);
  Tensor train1 = transformer_forward(joint, mask, params, c, &d4, true);
  Tensor train2 = transformer_forward(joint, mask, params, c, &d2, true);
  bool same_stream_same = true, differs_from_eval = false, differs_across_streams = false;
  Tensor train3 = transformer_forward(joint, mask, params, c, &d3, true);
  for (std::int64_t i = 0; i < eval.numel(); ++i) {
    same_stream_same = same_stream_same && train1.at(i) == train2.at(i);
    differs_from_eval = differs_from_eval || train1.at(i) != eval.at(i);
    differs_across_streams = differs_across_streams || train1.at(i) != train3.at(i);
  }
  CHECK(same_stream_same);
  CHECK(differs_from_eval);
  CHECK(differs_across_streams);
}

TEST_CASE("non-finite activations abort naming the layer") {
  ModelConfig c = test_helpers::tiny_config();
  ParamRegistry reg;
  Rng prng(47);
  TransformerParams params(c, prng, reg);
  ValidLengths used{2, 1, 1, 1};
  Rng rng(49);
  Tensor joint = build_joint_sequence(random_bundle(c, used, rng),
                                      padded_block(c.t_cap, c.d, used.t_used, rng), c);
  Tensor poisoned = with_entry(joint, 0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_WITH_AS(transformer_forward(poisoned, build_mask(used, c), params, c),
                       doctest::Contains("fusion layer 0"), std::runtime_error);
}

TEST_CASE("finite differences validate the whole layer stack") {
  ModelConfig c;
  c.d = 8;
  c.layers = 1;
  c.heads = 2;
  c.k_cap = 4;
  c.m_cap = 2;
  c.n_cap = 2;
  c.t_cap = 2;
  c.dropout = 0.0;
  ParamRegistry reg;
  Rng prng(53);
  TransformerParams params(c, prng, reg);

  ValidLengths used{3, 1, 2, 2};
  Rng rng(59);
  std::vector<double> seq_data(static_cast<size_t>(c.joint_len() * c.d));
  for (auto& v : seq_data) v = rng.normal();
  Tensor seq = Tensor::from_data({c.joint_len(), c.d}, std::move(seq_data), true);
  Tensor mask = build_mask(used, c);
  std::vector<double> w_data(static_cast<size_t>(c.joint_len() * c.d));
  for (auto& v : w_data) v = rng.normal();
  Tensor w = Tensor::from_data({c.joint_len(), c.d}, std::move(w_data));

  auto f = [&] { return sum(mul(transformer_forward(seq, mask, params, c), w)); };
  std::vector<std::pair<std::string, Tensor>> checked;
  checked.emplace_back("seq", seq);
  for (size_t i = 0; i < reg.size(); ++i) checked.emplace_back(reg.name(i), reg.tensor(i));
  auto report = finite_difference_check(f, checked);
  CAPTURE(report.worst_param);
  CAPTURE(report.max_rel_error);
  CHECK(report.pass(1e-5));
  CHECK(report.entries_checked > 500);
}
