#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "tag/corpus.hpp"
#include "tag/pipeline.hpp"
#include "tag/text.hpp"

using namespace tag;

namespace {

struct Fixture {
  ModelConfig config = test_helpers::tiny_config();
  std::vector<Scene> scenes = test_helpers::tiny_corpus(20);
  Vocabulary vocab = Vocabulary::build(scenes);
  PointerModel model{config, vocab, 16};
};

// Biasing one output column high enough makes greedy decoding emit it
// unconditionally, which pins down the filter paths.
void rig_constant_output(PointerModel& model, int vocab_id) {
  auto bias = model.params().get("decoder.vocab.bias").mutable_data();
  bias[static_cast<size_t>(vocab_id)] = 50.0;
}

Scene area_scene() {
  Scene s;
  s.image_id = "areas";
  s.width = 100;
  s.height = 100;
  s.objects.push_back({"sign", {0, 0, 99, 99}, {0.0}});
  s.ocr_tokens.push_back({"mid", {10, 10, 30, 20}, {0.0}});    // 200
  s.ocr_tokens.push_back({"topa", {50, 5, 80, 15}, {0.0}});    // 300, higher
  s.ocr_tokens.push_back({"topb", {10, 40, 40, 50}, {0.0}});   // 300, lower
  s.ocr_tokens.push_back({"small", {5, 60, 15, 70}, {0.0}});   // 100
  QAPair qa;
  qa.question_words = {"what", "is", "here"};
  qa.answer_words = {"topa"};
  qa.answer_source_indices = {1};
  s.qa_pairs.push_back(qa);
  return s;
}

}  // namespace

TEST_CASE("strategy names parse both ways") {
  auto s = AnswerSelectionStrategy::parse("largest", 9);
  CHECK(s.kind == AnswerSelectionStrategy::Kind::Largest);
  CHECK(s.name() == "largest");

  s = AnswerSelectionStrategy::parse("random", 9);
  CHECK(s.kind == AnswerSelectionStrategy::Kind::Random);
  CHECK(s.seed == 9);

  for (const char* text : {"top_3", "top-3", "top3"}) {
    s = AnswerSelectionStrategy::parse(text, 9);
    CHECK(s.kind == AnswerSelectionStrategy::Kind::TopK);
    CHECK(s.k == 3);
    CHECK(s.name() == "top_3");
  }
  CHECK_THROWS_WITH_AS(AnswerSelectionStrategy::parse("biggest", 9),
                       doctest::Contains("biggest"), std::runtime_error);
  CHECK_THROWS(AnswerSelectionStrategy::parse("top_0", 9));
  CHECK_THROWS(AnswerSelectionStrategy::parse("top_x", 9));
}

TEST_CASE("selection strategies pick by area, seed, or rank") {
  Scene s = area_scene();

  auto largest = select_answers(s, AnswerSelectionStrategy::parse("largest", 1));
  CHECK(largest == std::vector<int>{1});  // area tie broken by smaller y1

  auto top2 = select_answers(s, AnswerSelectionStrategy::parse("top_2", 1));
  CHECK(top2 == std::vector<int>{1, 2});
  auto top9 = select_answers(s, AnswerSelectionStrategy::parse("top_9", 1));
  CHECK(top9 == std::vector<int>{1, 2, 0, 3});

  auto r1 = select_answers(s, AnswerSelectionStrategy::parse("random", 5));
  auto r2 = select_answers(s, AnswerSelectionStrategy::parse("random", 5));
  REQUIRE(r1.size() == 1);
  CHECK(r1 == r2);  // reproducible per image id
  CHECK(r1[0] >= 0);
  CHECK(r1[0] < 4);

  // a different image id may move the pick, the draw being id-keyed
  Scene other = s;
  other.image_id = "areas2";
  bool moved = false;
  for (std::uint64_t seed = 0; seed < 8 && !moved; ++seed) {
    auto a = select_answers(s, AnswerSelectionStrategy::parse("random", seed));
    auto b = select_answers(other, AnswerSelectionStrategy::parse("random", seed));
    moved = a != b;
  }
  CHECK(moved);

  Scene empty = s;
  empty.ocr_tokens.clear();
  empty.qa_pairs[0].answer_source_indices.clear();
  CHECK(select_answers(empty, AnswerSelectionStrategy::parse("largest", 1)).empty());
  CHECK(select_answers(empty, AnswerSelectionStrategy::parse("random", 1)).empty());
  CHECK(select_answers(empty, AnswerSelectionStrategy::parse("top_3", 1)).empty());
}

TEST_CASE("generation rejects empty decodes") {
  Fixture f;
  rig_constant_output(f.model, Vocabulary::kEnd);
  GenerationOutcome out = generate_pair(f.model, f.scenes[0], 0);
  CHECK_FALSE(out.accepted);
  CHECK(out.reject_reason == "empty");
  CHECK(out.pair.question_words.empty());
  CHECK(out.per_step_source.empty());
}

TEST_CASE("generation rejects questions equal to an original") {
  Fixture f;
  rig_constant_output(f.model, f.vocab.id("what"));
  Scene scene = f.scenes[0];

  // the rigged decoder emits "what" for every step
  GenerationOutcome probe = generate_pair(f.model, scene, 0);
  REQUIRE(probe.accepted);
  CHECK(probe.pair.question_words ==
        std::vector<std::string>(static_cast<size_t>(f.config.t_cap), "what"));

  scene.qa_pairs[0].question_words = probe.pair.question_words;
  GenerationOutcome dup = generate_pair(f.model, scene, 0);
  CHECK_FALSE(dup.accepted);
  CHECK(dup.reject_reason == "duplicate");

  // generated pairs never block later generations, only originals do
  scene.qa_pairs[0].question_words = {"something", "else"};
  scene.qa_pairs.push_back(probe.pair);
  GenerationOutcome again = generate_pair(f.model, scene, 0);
  CHECK(again.accepted);
}

TEST_CASE("accepted pairs carry provenance, source index, and step sources") {
  Fixture f;
  rig_constant_output(f.model, f.vocab.id("what"));
  GenerationOutcome out = generate_pair(f.model, f.scenes[1], 2);
  REQUIRE(out.accepted);
  CHECK(out.pair.provenance == Provenance::Generated);
  CHECK(out.pair.answer_words ==
        std::vector<std::string>{f.scenes[1].ocr_tokens[2].text});
  CHECK(out.pair.answer_source_indices == std::vector<int>{2});
  REQUIRE(out.per_step_source.size() == out.pair.question_words.size());
  for (const auto& src : out.per_step_source) {
    bool ok = src == "vocab" || src.rfind("ocr:", 0) == 0;
    CHECK(ok);
  }

  CHECK_THROWS_WITH_AS(generate_pair(f.model, f.scenes[1], 99), doctest::Contains("out of range"),
                       std::runtime_error);
}

TEST_CASE("augmentation appends to byte-identical originals and balances its ledger") {
  Fixture f;
  AnswerSelectionStrategy strategy = AnswerSelectionStrategy::parse("top_2", 77);
  AugmentResult result = augment(f.scenes, f.model, strategy);

  CHECK(result.stats.strategy == "top_2");
  CHECK(result.stats.seed == 77);
  CHECK(result.stats.scenes == static_cast<int>(f.scenes.size()));
  REQUIRE(result.scenes.size() == f.scenes.size());

  int attempts = 0;
  for (const auto& s : f.scenes) attempts += static_cast<int>(select_answers(s, strategy).size());
  CHECK(result.stats.generated + result.stats.rejected_empty + result.stats.rejected_duplicate ==
        attempts);
  CHECK(result.stats.generated_tokens >= result.stats.copied_tokens);

  int appended = 0;
  for (size_t i = 0; i < f.scenes.size(); ++i) {
    const Scene& before = f.scenes[i];
    const Scene& after = result.scenes[i];
    REQUIRE(after.qa_pairs.size() >= before.qa_pairs.size());
    Scene trimmed = after;
    trimmed.qa_pairs.resize(before.qa_pairs.size());
    CHECK(scene_to_json_line(trimmed) == scene_to_json_line(before));
    for (size_t q = before.qa_pairs.size(); q < after.qa_pairs.size(); ++q) {
      CHECK(after.qa_pairs[q].provenance == Provenance::Generated);
      ++appended;
    }
  }
  CHECK(appended == result.stats.generated);
  CHECK(result.dump.size() == static_cast<size_t>(result.stats.generated));

  AugmentResult rerun = augment(f.scenes, f.model, strategy);
  REQUIRE(rerun.scenes.size() == result.scenes.size());
  for (size_t i = 0; i < result.scenes.size(); ++i)
    CHECK(scene_to_json_line(rerun.scenes[i]) == scene_to_json_line(result.scenes[i]));
  CHECK(rerun.stats.generated == result.stats.generated);

  SUBCASE("an end-rigged decoder rejects everything as empty") {
    Fixture g;
    rig_constant_output(g.model, Vocabulary::kEnd);
    AugmentResult none = augment(g.scenes, g.model,
                                 AnswerSelectionStrategy::parse("largest", 1));
    CHECK(none.stats.generated == 0);
    CHECK(none.stats.rejected_empty == static_cast<int>(g.scenes.size()));
    CHECK(none.stats.rejected_duplicate == 0);
    CHECK(none.dump.empty());
    for (size_t i = 0; i < g.scenes.size(); ++i)
      CHECK(scene_to_json_line(none.scenes[i]) == scene_to_json_line(g.scenes[i]));
  }
}

TEST_CASE("manifest holds exactly the six reporting fields") {
  AugmentStats stats;
  stats.strategy = "largest";
  stats.seed = 13;
  stats.scenes = 200;
  stats.generated = 190;
  stats.rejected_empty = 4;
  stats.rejected_duplicate = 6;

  auto path = std::filesystem::temp_directory_path() / "tagqa_manifest_test.json";
  write_augment_manifest(stats, path.string());
  std::ifstream in(path);
  nlohmann::json j = nlohmann::json::parse(in);
  CHECK(j.size() == 6);
  CHECK(j.at("strategy") == "largest");
  CHECK(j.at("seed") == 13);
  CHECK(j.at("scenes") == 200);
  CHECK(j.at("generated") == 190);
  CHECK(j.at("rejected_empty") == 4);
  CHECK(j.at("rejected_duplicate") == 6);
  std::filesystem::remove(path);
}

TEST_CASE("generation dump is one json record per accepted pair") {
  std::vector<DumpRecord> dump = {
      {"img-1", "stop", "what is written on the sign", {"vocab", "vocab", "vocab", "vocab", "vocab", "ocr:2"}},
      {"img-2", "exit", "what word is the largest", {"vocab", "ocr:0", "vocab", "vocab", "vocab"}},
  };
  auto path = std::filesystem::temp_directory_path() / "tagqa_dump_test.jsonl";
  write_generation_dump(dump, path.string());

  std::ifstream in(path);
  std::string line;
  size_t rows = 0;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.size() == 4);
    CHECK(j.at("image_id") == dump[rows].image_id);
    CHECK(j.at("answer") == dump[rows].answer);
    CHECK(j.at("generated_question") == dump[rows].generated_question);
    CHECK(j.at("per_step_source").get<std::vector<std::string>>() == dump[rows].per_step_source);
    ++rows;
  }
  CHECK(rows == dump.size());
  std::filesystem::remove(path);
}
