#pragma once

// End-to-end steps shared by the command line and the acceptance run:
// build a labeled dataset from snapshot rankings and fit a pair model.

#include "rankpromo/arena/config.hpp"
#include "rankpromo/training/dataset.hpp"
#include "rankpromo/training/ranksvm.hpp"

namespace rankpromo::arena {

struct TrainSettings {
  int round = 6;  // snapshot round whose ranking designates the documents
  training::CrossValidationConfig cv;
  unsigned threads = 1;
};

/// Reads the "training" section: round, label_mode, beta, epsilon, c_grid,
/// folds, seed, threads.
inline TrainSettings train_settings_from_json(const json& j) {
  TrainSettings s;
  s.round = optional_field<int>(j, "round", s.round);
  s.cv.label_mode = training::parse_label_mode(optional_field<std::string>(j, "label_mode", "l"));
  s.cv.beta = optional_field<double>(j, "beta", s.cv.beta);
  s.cv.epsilon = optional_field<double>(j, "epsilon", s.cv.epsilon);
  s.cv.c_grid = optional_field<std::vector<double>>(j, "c_grid", s.cv.c_grid);
  s.cv.folds = optional_field<int>(j, "folds", s.cv.folds);
  s.cv.solver.seed = optional_field<std::uint64_t>(j, "seed", s.cv.solver.seed);
  s.threads = optional_field<unsigned>(j, "threads", s.threads);
  if (s.round < 1) throw ValidationError("training round must be >= 1");
  s.cv.validate();
  return s;
}

inline std::vector<training::LabeledPair> build_dataset(const World& w, const TrainSettings& s,
                                                        training::DatasetSummary* summary = nullptr) {
  if (w.snapshots.empty()) throw ValidationError("no snapshots to train on");
  training::GenerationConfig g;
  g.beta = s.cv.beta;
  g.epsilon = s.cv.epsilon;
  g.label_mode = s.cv.label_mode;
  g.bot = {w.features, w.term_cap};
  g.threads = s.threads;
  return training::generate_training_set(training_snapshots(w.snapshots, s.round), w.engine,
                                         w.env->stats, w.env->store, g, summary);
}

inline training::TrainedModel train_model(const World& w, const TrainSettings& s,
                                          training::DatasetSummary* summary = nullptr) {
  return training::cross_validate(build_dataset(w, s, summary), s.cv);
}

}  // namespace rankpromo::arena
