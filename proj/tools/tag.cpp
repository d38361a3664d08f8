#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tag/config.hpp"
#include "tag/corpus.hpp"
#include "tag/hash.hpp"
#include "tag/manifest.hpp"
#include "tag/metrics.hpp"
#include "tag/model.hpp"
#include "tag/pipeline.hpp"
#include "tag/synth.hpp"
#include "tag/text.hpp"
#include "tag/train.hpp"
#include "tag/vocab.hpp"
#include "tag/vqa.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string path_join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

void write_loss_curve(const tag::TrainResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss curve " + path);
  out << "iteration,loss\n";
  for (const auto& [iter, loss] : result.loss_curve) out << iter << ',' << format_double(loss) << '\n';
}

// The training corpus is the only legal augmentation input; a val/test
// file name is the observable signal at this layer.
void refuse_eval_splits(const std::string& corpus_path) {
  const std::string stem = fs::path(corpus_path).stem().string();
  if (stem.find("val") != std::string::npos || stem.find("test") != std::string::npos)
    throw std::runtime_error("refusing to augment evaluation split: " + corpus_path);
}

int histogram_stats(json& out, const std::vector<int>& counts) {
  std::map<int, int> hist;
  long long total = 0;
  for (int c : counts) {
    ++hist[c];
    total += c;
  }
  json h = json::object();
  for (const auto& [value, count] : hist) h[std::to_string(value)] = count;
  out["histogram"] = std::move(h);
  out["mean"] = counts.empty() ? 0.0 : static_cast<double>(total) / counts.size();
  return static_cast<int>(counts.size());
}

// ---- synth -----------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 13;
  int scenes = 200;
  double sparsity = 0.4;
  std::string out;
};

void cmd_synth(const SynthArgs& args) {
  Timer timer;
  ensure_dir(args.out);

  tag::SynthOptions opt;
  opt.seed = args.seed;
  opt.n_scenes = args.scenes;
  opt.annotation_sparsity = args.sparsity;
  tag::SynthCorpus corpus = tag::synth_generate(opt);

  const std::string train_path = path_join(args.out, "train.jsonl");
  const std::string val_path = path_join(args.out, "val.jsonl");
  const std::string test_path = path_join(args.out, "test.jsonl");
  tag::save_corpus(corpus.train, train_path);
  tag::save_corpus(corpus.val, val_path);
  tag::save_corpus(corpus.test, test_path);

  std::vector<int> ocr_counts, qa_counts;
  for (const auto* split : {&corpus.train, &corpus.val, &corpus.test})
    for (const auto& scene : *split) {
      ocr_counts.push_back(static_cast<int>(scene.ocr_tokens.size()));
      qa_counts.push_back(static_cast<int>(scene.qa_pairs.size()));
    }
  json stats;
  stats["scenes"] = {{"train", corpus.train.size()},
                     {"val", corpus.val.size()},
                     {"test", corpus.test.size()}};
  histogram_stats(stats["ocr_per_image"], ocr_counts);
  histogram_stats(stats["qa_per_image"], qa_counts);
  const std::string stats_path = path_join(args.out, "stats.json");
  {
    std::ofstream out(stats_path);
    if (!out) throw std::runtime_error("cannot write stats " + stats_path);
    out << stats.dump(2) << '\n';
  }

  tag::RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = args.seed;
  manifest.details = {{"scenes", std::to_string(args.scenes)},
                      {"sparsity", format_double(args.sparsity)}};
  for (const auto& p : {train_path, val_path, test_path, stats_path})
    manifest.outputs.push_back(tag::hash_artifact(p));
  manifest.duration_seconds = timer.seconds();
  tag::write_run_manifest(manifest, path_join(args.out, "run_manifest.json"));
}

// ---- shared training plumbing ---------------------------------------

int appearance_dim_of(const std::vector<tag::Scene>& scenes) {
  for (const auto& scene : scenes) {
    if (!scene.objects.empty()) return static_cast<int>(scene.objects.front().appearance.size());
    if (!scene.ocr_tokens.empty()) return static_cast<int>(scene.ocr_tokens.front().appearance.size());
  }
  throw std::runtime_error("cannot infer appearance dimension: corpus has no regions");
}

struct TrainArgs {
  std::string config_path;
  std::string corpus;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_obj = false;
  bool no_ocr = false;
  bool no_extend_text = false;
};

tag::RunManifest train_common(const TrainArgs& args, tag::Task task) {
  Timer timer;
  ensure_dir(args.out);

  tag::ModelConfig config = args.config_path.empty() ? tag::ModelConfig{}
                                                     : tag::load_config(args.config_path);
  if (args.seed_set) config.seed = args.seed;

  auto scenes = tag::load_corpus(args.corpus);
  tag::Vocabulary vocab = tag::Vocabulary::build(scenes);

  tag::TrainOptions opts;
  opts.task = task;
  if (task == tag::Task::Answering) {
    opts.original_pairs_only = false;
    const double ratio = tag::provenance_ratio(scenes);
    if (ratio != 1.0) config = tag::scale_schedule(config, ratio);
  }

  tag::ModelFlags flags;
  flags.use_obj = !args.no_obj;
  flags.use_ocr = !args.no_ocr;
  flags.extend_text = !args.no_extend_text;

  tag::PointerModel model(config, std::move(vocab), appearance_dim_of(scenes), flags);
  tag::TrainResult result = tag::train_model(model, scenes, opts);

  tag::save_model_bundle(model, task, args.out);
  write_loss_curve(result, path_join(args.out, "loss_curve.csv"));

  tag::RunManifest manifest;
  manifest.command = task == tag::Task::QuestionGeneration ? "train-tag" : "train-vqa";
  manifest.config_text = tag::config_to_string(config);
  manifest.seed = config.seed;
  manifest.inputs.push_back(tag::hash_artifact(args.corpus));
  for (const char* name : {"checkpoint.bin", "config.cfg", "vocab.txt", "loss_curve.csv"})
    manifest.outputs.push_back(tag::hash_artifact(path_join(args.out, name)));
  manifest.details = {{"examples", std::to_string(result.examples)},
                      {"iterations", std::to_string(result.iterations)},
                      {"initial_loss", format_double(result.initial_loss)},
                      {"final_loss", format_double(result.final_loss)}};
  manifest.duration_seconds = timer.seconds();
  tag::write_run_manifest(manifest, path_join(args.out, "run_manifest.json"));
  return manifest;
}

// ---- augment ---------------------------------------------------------

struct AugmentArgs {
  std::string checkpoint;
  std::string corpus;
  std::string strategy = "largest";
  std::uint64_t seed = 13;
  std::string out;
};

void cmd_augment(const AugmentArgs& args) {
  Timer timer;
  refuse_eval_splits(args.corpus);
  ensure_dir(args.out);

  tag::ModelBundle bundle = tag::load_model_bundle(args.checkpoint);
  if (bundle.task != tag::Task::QuestionGeneration)
    throw std::runtime_error("augment requires a question-generation checkpoint, got " +
                             std::string(tag::task_name(bundle.task)));

  auto scenes = tag::load_corpus(args.corpus);
  auto strategy = tag::AnswerSelectionStrategy::parse(args.strategy, args.seed);
  tag::AugmentResult result = tag::augment(scenes, *bundle.model, strategy);

  const std::string corpus_path = path_join(args.out, "augmented.jsonl");
  tag::save_corpus(result.scenes, corpus_path);
  const std::string manifest_path = path_join(args.out, "manifest.json");
  tag::write_augment_manifest(result.stats, manifest_path);

  // Qualitative dump: 20 seeded sampled pairs.
  std::vector<tag::DumpRecord> sample = result.dump;
  if (sample.size() > 20) {
    tag::Rng rng(tag::derive_seed(args.seed, "dump-sample"));
    for (size_t i = 0; i < 20; ++i) {
      const size_t j = i + rng.uniform_int(sample.size() - i);
      std::swap(sample[i], sample[j]);
    }
    sample.resize(20);
  }
  const std::string dump_path = path_join(args.out, "dump.jsonl");
  tag::write_generation_dump(sample, dump_path);

  tag::RunManifest manifest;
  manifest.command = "augment";
  manifest.seed = args.seed;
  manifest.inputs.push_back(tag::hash_artifact(args.corpus));
  manifest.inputs.push_back(tag::hash_artifact(path_join(args.checkpoint, "checkpoint.bin")));
  for (const auto& p : {corpus_path, manifest_path, dump_path})
    manifest.outputs.push_back(tag::hash_artifact(p));
  const double copy_rate = result.stats.generated_tokens > 0
                               ? static_cast<double>(result.stats.copied_tokens) /
                                     result.stats.generated_tokens
                               : 0.0;
  manifest.details = {{"strategy", result.stats.strategy},
                      {"generated", std::to_string(result.stats.generated)},
                      {"rejected_empty", std::to_string(result.stats.rejected_empty)},
                      {"rejected_duplicate", std::to_string(result.stats.rejected_duplicate)},
                      {"novel_answer_texts", std::to_string(result.stats.novel_answer_texts)},
                      {"ocr_copy_rate", format_double(copy_rate)}};
  manifest.duration_seconds = timer.seconds();
  tag::write_run_manifest(manifest, path_join(args.out, "run_manifest.json"));
}

// ---- eval ------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::string out;
};

void cmd_eval(const EvalArgs& args) {
  Timer timer;
  ensure_dir(args.out);

  tag::ModelBundle bundle = tag::load_model_bundle(args.checkpoint);
  if (bundle.task != tag::Task::Answering)
    throw std::runtime_error("eval requires an answering checkpoint, got " +
                             std::string(tag::task_name(bundle.task)));
  auto scenes = tag::load_corpus(args.corpus);
  tag::EvalReport report = tag::evaluate_vqa(*bundle.model, scenes);

  const std::string json_path = path_join(args.out, "eval.json");
  const std::string csv_path = path_join(args.out, "eval.csv");
  tag::write_eval_json(report, json_path);
  tag::write_eval_csv(report, csv_path);

  tag::RunManifest manifest;
  manifest.command = "eval";
  manifest.seed = bundle.model->config().seed;
  manifest.inputs.push_back(tag::hash_artifact(args.corpus));
  manifest.inputs.push_back(tag::hash_artifact(path_join(args.checkpoint, "checkpoint.bin")));
  manifest.outputs.push_back(tag::hash_artifact(json_path));
  manifest.outputs.push_back(tag::hash_artifact(csv_path));
  manifest.details = {{"accuracy", format_double(report.accuracy)},
                      {"anls", format_double(report.anls)},
                      {"n_examples", std::to_string(report.n_examples)}};
  manifest.duration_seconds = timer.seconds();
  tag::write_run_manifest(manifest, path_join(args.out, "run_manifest.json"));

  std::cout << "accuracy=" << format_double(report.accuracy)
            << " anls=" << format_double(report.anls) << " n=" << report.n_examples << '\n';
}

// ---- ablate ----------------------------------------------------------

struct AblateArgs {
  std::string which;
  std::string corpus_dir;
  std::string config_path;
  std::string seeds = "13,17,23";
  std::string out;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw std::runtime_error("no seeds given");
  return seeds;
}

struct AblationRow {
  std::string label;
  double accuracy = 0.0;
  double anls = 0.0;
};

// One full loop: train TAG with the given flags, augment with the given
// strategy, train the downstream model on the result, evaluate on val.
tag::EvalReport ablation_run(const std::vector<tag::Scene>& train, const std::vector<tag::Scene>& val,
                             tag::ModelConfig config, std::uint64_t seed, tag::ModelFlags tag_flags,
                             const std::string& strategy_name) {
  config.seed = seed;
  const int appearance = appearance_dim_of(train);

  tag::PointerModel tag_model(config, tag::Vocabulary::build(train), appearance, tag_flags);
  tag::TrainOptions tag_opts;
  tag_opts.task = tag::Task::QuestionGeneration;
  tag::train_model(tag_model, train, tag_opts);

  auto strategy = tag::AnswerSelectionStrategy::parse(strategy_name, seed);
  tag::AugmentResult augmented = tag::augment(train, tag_model, strategy);

  tag::ModelConfig vqa_config = tag::scale_schedule(config, tag::provenance_ratio(augmented.scenes));
  tag::PointerModel vqa_model(vqa_config, tag::Vocabulary::build(augmented.scenes), appearance);
  tag::TrainOptions vqa_opts;
  vqa_opts.task = tag::Task::Answering;
  vqa_opts.original_pairs_only = false;
  tag::train_model(vqa_model, augmented.scenes, vqa_opts);

  return tag::evaluate_vqa(vqa_model, val);
}

void cmd_ablate(const AblateArgs& args) {
  Timer timer;
  ensure_dir(args.out);
  if (args.which != "modality" && args.which != "selection")
    throw std::runtime_error("unknown ablation '" + args.which + "' (expected modality or selection)");

  const std::string train_path = path_join(args.corpus_dir, "train.jsonl");
  const std::string val_path = path_join(args.corpus_dir, "val.jsonl");
  auto train = tag::load_corpus(train_path);
  auto val = tag::load_corpus(val_path);
  tag::ModelConfig config = args.config_path.empty() ? tag::ModelConfig{}
                                                     : tag::load_config(args.config_path);
  const auto seeds = parse_seeds(args.seeds);

  struct Variant {
    std::string label;
    tag::ModelFlags flags;
    std::string strategy;
  };
  std::vector<Variant> variants;
  if (args.which == "modality") {
    variants = {{"ans", {false, false, true}, "largest"},
                {"ans+obj", {true, false, true}, "largest"},
                {"ans+ocr", {false, true, true}, "largest"},
                {"ans+obj+ocr", {true, true, true}, "largest"}};
  } else {
    variants = {{"random", {}, "random"},
                {"largest", {}, "largest"},
                {"top_3", {}, "top_3"},
                {"top_5", {}, "top_5"}};
  }

  std::ofstream runs(path_join(args.out, "ablation_runs.csv"));
  if (!runs) throw std::runtime_error("cannot write ablation runs csv");
  runs << "row,seed,accuracy,anls\n";

  std::vector<AblationRow> rows;
  for (const Variant& variant : variants) {
    AblationRow row{variant.label, 0.0, 0.0};
    for (auto seed : seeds) {
      tag::EvalReport report = ablation_run(train, val, config, seed, variant.flags, variant.strategy);
      runs << variant.label << ',' << seed << ',' << format_double(report.accuracy) << ','
           << format_double(report.anls) << '\n';
      row.accuracy += report.accuracy;
      row.anls += report.anls;
    }
    row.accuracy /= static_cast<double>(seeds.size());
    row.anls /= static_cast<double>(seeds.size());
    rows.push_back(row);
  }
  runs.close();

  const std::string csv_path = path_join(args.out, "ablation.csv");
  {
    std::ofstream out(csv_path);
    out << "row,accuracy,anls\n";
    for (const auto& row : rows)
      out << row.label << ',' << format_double(row.accuracy) << ',' << format_double(row.anls) << '\n';
  }
  const std::string md_path = path_join(args.out, "ablation.md");
  {
    size_t best = 0;
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].accuracy > rows[best].accuracy) best = i;
    std::ofstream out(md_path);
    out << "# " << (args.which == "modality" ? "Modality ablation" : "Answer-selection ablation")
        << "\n\n| row | accuracy | anls |\n|---|---|---|\n";
    for (size_t i = 0; i < rows.size(); ++i)
      out << "| " << rows[i].label << (i == best ? " (best)" : "") << " | "
          << format_double(rows[i].accuracy) << " | " << format_double(rows[i].anls) << " |\n";
  }

  tag::RunManifest manifest;
  manifest.command = "ablate";
  manifest.config_text = tag::config_to_string(config);
  manifest.seed = seeds.front();
  manifest.inputs.push_back(tag::hash_artifact(train_path));
  manifest.inputs.push_back(tag::hash_artifact(val_path));
  for (const auto& p : {csv_path, md_path, path_join(args.out, "ablation_runs.csv")})
    manifest.outputs.push_back(tag::hash_artifact(p));
  manifest.details = {{"which", args.which}, {"seeds", args.seeds}};
  manifest.duration_seconds = timer.seconds();
  tag::write_run_manifest(manifest, path_join(args.out, "run_manifest.json"));
}

// ---- report ----------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;  // label=path/to/eval.json
  std::string out;
};

void cmd_report(const ReportArgs& args) {
  Timer timer;
  ensure_dir(args.out);

  struct Row {
    std::string label;
    double accuracy = 0.0;
    double anls = 0.0;
    int n = 0;
  };
  std::vector<Row> rows;
  tag::RunManifest manifest;
  for (const auto& spec : args.inputs) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("report input must be label=path, got '" + spec + "'");
    Row row;
    row.label = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing eval report: " + path);
    json j = json::parse(in);
    row.accuracy = j.at("accuracy").get<double>();
    row.anls = j.at("anls").get<double>();
    row.n = j.at("n_examples").get<int>();
    rows.push_back(row);
    manifest.inputs.push_back(tag::hash_artifact(path));
  }
  if (rows.empty()) throw std::runtime_error("report needs at least one --in label=path");

  size_t best_acc = 0, best_anls = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].accuracy > rows[best_acc].accuracy) best_acc = i;
    if (rows[i].anls > rows[best_anls].anls) best_anls = i;
  }

  const std::string csv_path = path_join(args.out, "report.csv");
  {
    std::ofstream out(csv_path);
    out << "run,accuracy,anls,n_examples\n";
    for (const auto& row : rows)
      out << row.label << ',' << format_double(row.accuracy) << ',' << format_double(row.anls) << ','
          << row.n << '\n';
  }
  const std::string md_path = path_join(args.out, "report.md");
  {
    std::ofstream out(md_path);
    out << "# Evaluation comparison\n\n| run | accuracy | anls | examples |\n|---|---|---|---|\n";
    for (size_t i = 0; i < rows.size(); ++i)
      out << "| " << rows[i].label << " | " << format_double(rows[i].accuracy)
          << (i == best_acc ? " (best)" : "") << " | " << format_double(rows[i].anls)
          << (i == best_anls ? " (best)" : "") << " | " << rows[i].n << " |\n";
  }

  manifest.command = "report";
  manifest.outputs.push_back(tag::hash_artifact(csv_path));
  manifest.outputs.push_back(tag::hash_artifact(md_path));
  manifest.duration_seconds = timer.seconds();
  tag::write_run_manifest(manifest, path_join(args.out, "run_manifest.json"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TAG question-answer generation and downstream Text-VQA pipeline"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene-text corpus");
  synth->add_option("--seed", synth_args.seed, "Corpus seed");
  synth->add_option("--scenes", synth_args.scenes, "Number of scenes");
  synth->add_option("--sparsity", synth_args.sparsity, "Annotation sparsity in (0, 1]");
  synth->add_option("--out", synth_args.out, "Output directory")->required();

  TrainArgs tag_args;
  auto* train_tag = app.add_subcommand("train-tag", "Train the question-generation model");
  train_tag->add_option("--config", tag_args.config_path, "key=value config file");
  train_tag->add_option("--corpus", tag_args.corpus, "Training corpus JSONL")->required();
  train_tag->add_option("--out", tag_args.out, "Model output directory")->required();
  train_tag->add_option("--seed", tag_args.seed, "Override config seed")
      ->each([&](const std::string&) { tag_args.seed_set = true; });
  train_tag->add_flag("--no-obj", tag_args.no_obj, "Disable the object modality");
  train_tag->add_flag("--no-ocr", tag_args.no_ocr, "Disable the OCR modality");
  train_tag->add_flag("--no-extend-text", tag_args.no_extend_text,
                      "Do not append object labels / OCR texts to the text block");

  TrainArgs vqa_args;
  auto* train_vqa = app.add_subcommand("train-vqa", "Train the downstream answering model");
  train_vqa->add_option("--config", vqa_args.config_path, "key=value config file");
  train_vqa->add_option("--corpus", vqa_args.corpus, "Training corpus JSONL")->required();
  train_vqa->add_option("--out", vqa_args.out, "Model output directory")->required();
  train_vqa->add_option("--seed", vqa_args.seed, "Override config seed")
      ->each([&](const std::string&) { vqa_args.seed_set = true; });

  AugmentArgs augment_args;
  auto* augment = app.add_subcommand("augment", "Generate QA pairs for a training corpus");
  augment->add_option("--checkpoint", augment_args.checkpoint, "Question-generation model directory")
      ->required();
  augment->add_option("--corpus", augment_args.corpus, "Training corpus JSONL")->required();
  augment->add_option("--strategy", augment_args.strategy, "largest | random | top_<k>");
  augment->add_option("--seed", augment_args.seed, "Selection / sampling seed");
  augment->add_option("--out", augment_args.out, "Output directory")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Evaluate an answering model on a split");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Answering model directory")->required();
  eval->add_option("--corpus", eval_args.corpus, "Evaluation split JSONL")->required();
  eval->add_option("--out", eval_args.out, "Output directory")->required();

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Run the modality or selection ablation");
  ablate->add_option("--which", ablate_args.which, "modality | selection")->required();
  ablate->add_option("--corpus-dir", ablate_args.corpus_dir, "Directory with train.jsonl/val.jsonl")
      ->required();
  ablate->add_option("--config", ablate_args.config_path, "key=value config file");
  ablate->add_option("--seeds", ablate_args.seeds, "Comma-separated seeds");
  ablate->add_option("--out", ablate_args.out, "Output directory")->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Render a comparison table from eval reports");
  report->add_option("--in", report_args.inputs, "label=path/to/eval.json (repeatable)")->required();
  report->add_option("--out", report_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) {
      json err{{"error", e.what()}, {"command", "parse"}};
      std::cerr << err.dump() << '\n';
    }
    return code;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (synth->parsed()) cmd_synth(synth_args);
    else if (train_tag->parsed()) train_common(tag_args, tag::Task::QuestionGeneration);
    else if (train_vqa->parsed()) train_common(vqa_args, tag::Task::Answering);
    else if (augment->parsed()) cmd_augment(augment_args);
    else if (eval->parsed()) cmd_eval(eval_args);
    else if (ablate->parsed()) cmd_ablate(ablate_args);
    else if (report->parsed()) cmd_report(report_args);
  } catch (const std::exception& e) {
    json err{{"error", e.what()}, {"command", command}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
