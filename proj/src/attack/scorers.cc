// Copyright 2026 The privaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privaudit/attack/scorers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "absl/strings/str_cat.h"
#include "privaudit/common/numeric.h"
#include "privaudit/common/parallel.h"
#include "privaudit/common/status_macros.h"

namespace privaudit::attack {
namespace {

enum Stream : uint64_t { kShadowChallenge = 51, kShadowPipeline = 52 };

// Logit confidences of every universe example under one model.
absl::StatusOr<std::vector<double>> LogitConfidences(
    const learners::ModelArtifact& model, const data::Universe& universe,
    double clamp) {
  ASSIGN_OR_RETURN(auto predictions, learners::Evaluate(model, universe));
  std::vector<double> out(universe.size());
  for (size_t i = 0; i < universe.size(); ++i) {
    out[i] = LogitConfidence(predictions[i].confidence[universe.label(i)], clamp);
  }
  return out;
}

struct GaussianFit {
  double mean = 0.0;
  double variance = 0.0;
};

GaussianFit Fit(const std::vector<double>& values, double floor) {
  GaussianFit fit;
  const double n = static_cast<double>(values.size());
  fit.mean = ExactSum(values) / n;
  ExactAccumulator sq;
  for (double v : values) sq.Add((v - fit.mean) * (v - fit.mean));
  fit.variance = std::max(sq.Sum() / n, floor);
  return fit;
}

double LogDensity(double x, const GaussianFit& g) {
  const double u = x - g.mean;
  return -0.5 * (u * u / g.variance + std::log(2 * M_PI * g.variance));
}

}  // namespace

absl::StatusOr<ScoreSet> ScoreLossThreshold(const learners::ModelArtifact& model,
                                            const data::Universe& universe) {
  ASSIGN_OR_RETURN(auto predictions, learners::Evaluate(model, universe));
  ScoreSet out;
  out.ids.assign(universe.ids().begin(), universe.ids().end());
  out.scores.resize(universe.size());
  for (size_t i = 0; i < universe.size(); ++i) {
    out.scores[i] = -predictions[i].loss;
  }
  out.scorer = "loss_threshold";
  out.target = model.provenance;
  return out;
}

bool CoversEveryExample(const std::vector<data::MembershipChallenge>& challenges,
                        size_t universe_size) {
  for (size_t i = 0; i < universe_size; ++i) {
    bool in = false;
    bool out = false;
    for (const auto& c : challenges) {
      (c.member_bits[i] ? in : out) = true;
    }
    if (!in || !out) return false;
  }
  return true;
}

absl::StatusOr<ShadowEnsemble> TrainShadowsOnChallenges(
    const data::Universe& universe, const PipelineSpec& pipeline,
    std::vector<data::MembershipChallenge> challenges, uint64_t seed,
    int jobs) {
  if (challenges.size() < 2) {
    return absl::InvalidArgumentError("need at least two shadow models");
  }
  for (const auto& c : challenges) {
    if (c.member_bits.size() != universe.size()) {
      return absl::InvalidArgumentError(
          "shadow challenge does not match the universe size");
    }
  }
  if (!CoversEveryExample(challenges, universe.size())) {
    return absl::FailedPreconditionError(
        "shadow challenges leave some example never IN or never OUT");
  }
  ShadowEnsemble ensemble;
  ensemble.shadows.resize(challenges.size());
  std::vector<absl::Status> status(challenges.size());
  ParallelFor(challenges.size(), jobs, [&](size_t j) {
    const data::Dataset t = data::TrainingSet(universe, challenges[j]);
    auto run = RunPipeline(pipeline, t, DeriveSeed(seed, kShadowPipeline, j));
    if (!run.ok()) {
      status[j] = run.status();
      return;
    }
    ensemble.shadows[j] = {std::move(challenges[j]), std::move(run->model)};
  });
  for (const auto& s : status) RETURN_IF_ERROR(s);
  return ensemble;
}

absl::StatusOr<ShadowEnsemble> TrainShadows(const data::Universe& universe,
                                            const PipelineSpec& pipeline,
                                            const ShadowOptions& options,
                                            uint64_t seed) {
  if (options.count < 2) {
    return absl::InvalidArgumentError("need at least two shadow models");
  }
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    std::vector<data::MembershipChallenge> challenges;
    for (int j = 0; j < options.count; ++j) {
      const uint64_t s = DeriveSeed(seed, kShadowChallenge,
                                    static_cast<uint64_t>(attempt) * options.count + j);
      ASSIGN_OR_RETURN(auto c, data::SampleMembership(
                                   universe, options.sampling_rate, s));
      challenges.push_back(std::move(c));
    }
    if (CoversEveryExample(challenges, universe.size())) {
      return TrainShadowsOnChallenges(universe, pipeline, std::move(challenges),
                                      seed, options.jobs);
    }
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "no shadow challenge set with every example both IN and OUT after ",
      options.max_retries + 1, " attempts; increase the shadow count"));
}

double LogitConfidence(double p, double clamp) {
  const double c = std::clamp(p, clamp, 1.0 - clamp);
  return std::log(c) - std::log1p(-c);
}

absl::StatusOr<ScoreSet> ScoreLira(const learners::ModelArtifact& target,
                                   const data::Universe& universe,
                                   const ShadowEnsemble& shadows,
                                   const LiraOptions& options) {
  std::vector<data::MembershipChallenge> challenges;
  for (const auto& s : shadows.shadows) challenges.push_back(s.challenge);
  if (shadows.shadows.size() < 2 ||
      !CoversEveryExample(challenges, universe.size())) {
    return absl::FailedPreconditionError(
        "LiRA needs shadows with every example both IN and OUT");
  }
  if (!(options.variance_floor > 0.0)) {
    return absl::InvalidArgumentError("variance floor must be positive");
  }
  std::vector<std::vector<double>> shadow_logits;
  for (const auto& s : shadows.shadows) {
    ASSIGN_OR_RETURN(auto logits, LogitConfidences(s.model, universe,
                                                    options.confidence_clamp));
    shadow_logits.push_back(std::move(logits));
  }
  ASSIGN_OR_RETURN(auto target_logits,
                   LogitConfidences(target, universe, options.confidence_clamp));
  ScoreSet out;
  out.ids.assign(universe.ids().begin(), universe.ids().end());
  out.scores.resize(universe.size());
  std::vector<double> in;
  std::vector<double> out_values;
  for (size_t i = 0; i < universe.size(); ++i) {
    in.clear();
    out_values.clear();
    for (size_t j = 0; j < shadows.shadows.size(); ++j) {
      (shadows.shadows[j].challenge.member_bits[i] ? in : out_values)
          .push_back(shadow_logits[j][i]);
    }
    const GaussianFit fit_in = Fit(in, options.variance_floor);
    const GaussianFit fit_out = Fit(out_values, options.variance_floor);
    out.scores[i] =
        LogDensity(target_logits[i], fit_in) - LogDensity(target_logits[i], fit_out);
  }
  out.scorer = "lira";
  out.target = target.provenance;
  return out;
}

absl::Status WriteScoresCsv(const ScoreSet& scores,
                            const std::vector<bool>& member_bits,
                            std::ostream& out) {
  if (member_bits.size() != scores.scores.size()) {
    return absl::InvalidArgumentError("scores and membership bits differ in size");
  }
  const auto saved = out.precision(std::numeric_limits<double>::max_digits10);
  out << "id,score,member_bit\n";
  for (size_t i = 0; i < scores.scores.size(); ++i) {
    out << scores.ids[i] << ',' << scores.scores[i] << ','
        << (member_bits[i] ? 1 : 0) << '\n';
  }
  out.precision(saved);
  return absl::OkStatus();
}

}  // namespace privaudit::attack
