#pragma once

#include <utility>
#include <vector>

#include "tag/model.hpp"
#include "tag/scene.hpp"

namespace tag {

struct TrainOptions {
  Task task = Task::QuestionGeneration;
  // Question generation trains on originally labeled pairs only; the
  // downstream model consumes generated pairs too.
  bool original_pairs_only = true;
  int log_every = 50;
};

struct TrainResult {
  std::vector<std::pair<int, double>> loss_curve;  // (iteration, batch loss)
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int examples = 0;
  int iterations = 0;
};

// Adam + staircase schedule over seeded uniform batches, using the
// schedule fields of model.config(). Aborts with the iteration index on
// a non-finite loss.
TrainResult train_model(PointerModel& model, const std::vector<Scene>& train_scenes,
                        const TrainOptions& options);

// Pair count divided by original-provenance pair count; 1.0 for an
// unaugmented corpus.
double provenance_ratio(const std::vector<Scene>& scenes);

// Longer schedule for a bigger corpus: max_iters and every decay step
// multiplied by `ratio` (rounded to nearest).
ModelConfig scale_schedule(ModelConfig config, double ratio);

}  // namespace tag
