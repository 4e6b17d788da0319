// Copyright 2026 The PhaseForge Authors.
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

#include "phaseforge/splits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "phaseforge/error.hpp"

namespace phaseforge {

std::string_view recording_system_name(RecordingSystem system) {
  switch (system) {
    case RecordingSystem::kSi: return "si";
    case RecordingSystem::kXi: return "xi";
    case RecordingSystem::kOther: return "other";
  }
  return "other";
}

std::optional<RecordingSystem> parse_recording_system(std::string_view name) {
  if (name == "si") return RecordingSystem::kSi;
  if (name == "xi") return RecordingSystem::kXi;
  if (name == "other") return RecordingSystem::kOther;
  return std::nullopt;
}

std::string_view split_mode_name(SplitMode mode) {
  switch (mode) {
    case SplitMode::kAuto: return "auto";
    case SplitMode::kExhaustive: return "exhaustive";
    case SplitMode::kIndependent: return "independent";
  }
  return "auto";
}

std::optional<double> CaseMetadata::covariate(std::string_view name) const {
  if (name == "age") return age;
  if (name == "operation_minutes") return operation_minutes;
  if (name == "bleeding_ml") return bleeding_ml;
  if (name == "bmi") return bmi;
  auto it = extra.find(std::string(name));
  if (it == extra.end()) return std::nullopt;
  return it->second;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

CovariateMatrix covariate_matrix(std::span<const CaseMetadata> cases,
                                 std::span<const std::string> covariates) {
  CovariateMatrix m;
  m.cases = cases.size();
  m.covariates = covariates.size();
  m.values.assign(m.cases * m.covariates, 0.0);
  for (std::size_t v = 0; v < covariates.size(); ++v) {
    double sum = 0.0;
    std::size_t present = 0;
    for (const auto& c : cases) {
      if (auto x = c.covariate(covariates[v])) {
        if (!std::isfinite(*x) || *x < 0.0) {
          throw Error(ErrorCode::kNumericError,
                      "covariate '" + covariates[v] + "' of case '" +
                          c.case_id + "' must be finite and >= 0");
        }
        sum += *x;
        ++present;
      }
    }
    if (present == 0) {
      throw Error(ErrorCode::kUnknownCovariate,
                  "no case carries covariate '" + covariates[v] + "'");
    }
    const double mean = sum / static_cast<double>(present);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t c = 0; c < cases.size(); ++c) {
      auto x = cases[c].covariate(covariates[v]);
      if (!x) {
        m.imputed.push_back({cases[c].case_id, covariates[v], mean});
      }
      const double value = x.value_or(mean);
      m.values[c * m.covariates + v] = value;
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
    const double span = hi - lo;
    for (std::size_t c = 0; c < cases.size(); ++c) {
      double& value = m.values[c * m.covariates + v];
      value = span > 0.0 ? (value - lo) / span : 0.0;
    }
  }
  return m;
}

double balance_score(const CovariateMatrix& matrix,
                     std::span<const std::vector<std::size_t>> test_sets) {
  double score = 0.0;
  for (std::size_t v = 0; v < matrix.covariates; ++v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& set : test_sets) {
      double sum = 0.0;
      for (std::size_t c : set) sum += matrix.at(c, v);
      const double mean = set.empty() ? 0.0 : sum / static_cast<double>(set.size());
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
    }
    if (!test_sets.empty()) score = std::max(score, hi - lo);
  }
  return score;
}

namespace {

// Per-fold covariate sums let a candidate swap be scored in O(folds * vars).
class Assignment {
 public:
  Assignment(const CovariateMatrix& matrix,
             std::vector<std::vector<std::size_t>> test_sets)
      : matrix_(&matrix), sets_(std::move(test_sets)) {
    sums_.assign(sets_.size() * matrix_->covariates, 0.0);
    for (std::size_t f = 0; f < sets_.size(); ++f) {
      for (std::size_t c : sets_[f]) add(f, c, 1.0);
    }
  }

  const std::vector<std::vector<std::size_t>>& sets() const { return sets_; }

  // Fresh sums, free of accumulated rounding.
  Assignment rebuilt() const { return Assignment(*matrix_, sets_); }

  double score() const {
    double score = 0.0;
    for (std::size_t v = 0; v < matrix_->covariates; ++v) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t f = 0; f < sets_.size(); ++f) {
        const double mean =
            sums_[f * matrix_->covariates + v] /
            static_cast<double>(sets_[f].size());
        lo = std::min(lo, mean);
        hi = std::max(hi, mean);
      }
      score = std::max(score, hi - lo);
    }
    return score;
  }

  // Replaces test case at sets_[fold][slot] by `incoming`.
  void replace(std::size_t fold, std::size_t slot, std::size_t incoming) {
    add(fold, sets_[fold][slot], -1.0);
    add(fold, incoming, 1.0);
    sets_[fold][slot] = incoming;
  }

 private:
  void add(std::size_t fold, std::size_t c, double sign) {
    for (std::size_t v = 0; v < matrix_->covariates; ++v) {
      sums_[fold * matrix_->covariates + v] += sign * matrix_->at(c, v);
    }
  }

  const CovariateMatrix* matrix_;
  std::vector<std::vector<std::size_t>> sets_;
  std::vector<double> sums_;
};

struct Move {
  std::size_t fold_a, slot_a;
  std::size_t incoming;                     // case entering fold_a
  std::optional<std::size_t> fold_b, slot_b;  // exhaustive: where it came from
};

void apply(Assignment& a, const Move& m) {
  const std::size_t outgoing = a.sets()[m.fold_a][m.slot_a];
  a.replace(m.fold_a, m.slot_a, m.incoming);
  if (m.fold_b) a.replace(*m.fold_b, *m.slot_b, outgoing);
}

void undo(Assignment& a, const Move& m, std::size_t outgoing) {
  if (m.fold_b) a.replace(*m.fold_b, *m.slot_b, m.incoming);
  a.replace(m.fold_a, m.slot_a, outgoing);
}

// Steepest-descent refinement; returns accepted swap count.
std::size_t refine(Assignment& a, std::size_t n, bool exhaustive,
                   std::size_t max_passes) {
  std::size_t accepted = 0;
  double current = a.score();
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    const std::size_t folds = a.sets().size();
    // owner[c] = (fold, slot) holding case c; only exhaustive moves use it.
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> owner(n);
    for (std::size_t f = 0; f < folds; ++f) {
      for (std::size_t s = 0; s < a.sets()[f].size(); ++s) {
        owner[a.sets()[f][s]] = {f, s};
      }
    }
    std::optional<Move> best;
    double best_score = current;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<bool> in_fold(n, false);
      for (std::size_t c : a.sets()[f]) in_fold[c] = true;
      for (std::size_t s = 0; s < a.sets()[f].size(); ++s) {
        for (std::size_t c = 0; c < n; ++c) {
          if (in_fold[c]) continue;
          Move m{f, s, c, std::nullopt, std::nullopt};
          if (exhaustive && owner[c]) {
            // Each unordered cross-fold pair is visited once.
            if (owner[c]->first < f) continue;
            m.fold_b = owner[c]->first;
            m.slot_b = owner[c]->second;
          }
          const std::size_t outgoing = a.sets()[f][s];
          apply(a, m);
          const double score = a.score();
          undo(a, m, outgoing);
          if (score < best_score) {
            best_score = score;
            best = m;
          }
        }
      }
    }
    if (!best) break;
    Assignment candidate = a;
    apply(candidate, *best);
    // Rescore from scratch so floating drift cannot fake an improvement.
    candidate = candidate.rebuilt();
    const double confirmed = candidate.score();
    if (!(confirmed < current)) break;
    a = std::move(candidate);
    current = confirmed;
    ++accepted;
  }
  return accepted;
}

std::vector<std::vector<std::size_t>> random_start(std::size_t n,
                                                   std::size_t folds,
                                                   std::size_t test_size,
                                                   bool exhaustive,
                                                   SeededRng& rng) {
  std::vector<std::vector<std::size_t>> sets(folds);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (exhaustive) {
    rng.shuffle(order);
    for (std::size_t f = 0; f < folds; ++f) {
      sets[f].assign(order.begin() + static_cast<std::ptrdiff_t>(f * test_size),
                     order.begin() +
                         static_cast<std::ptrdiff_t>((f + 1) * test_size));
    }
  } else {
    for (auto& set : sets) {
      rng.shuffle(order);
      set.assign(order.begin(),
                 order.begin() + static_cast<std::ptrdiff_t>(test_size));
    }
  }
  return sets;
}

}  // namespace

SplitPlan stratified_splits(std::span<const CaseMetadata> cases,
                            const SplitOptions& options) {
  const std::size_t n = cases.size();
  if (options.fold_count < 1 || options.test_size < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "fold_count and test_size must be >= 1");
  }
  if (options.test_size >= n) {
    throw Error(ErrorCode::kTooFewCases,
                "test_size " + std::to_string(options.test_size) +
                    " leaves no training cases out of " + std::to_string(n));
  }
  std::set<std::string> ids;
  for (const auto& c : cases) {
    if (!ids.insert(c.case_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate case id '" + c.case_id + "'");
    }
  }

  SplitMode mode = options.mode;
  if (mode == SplitMode::kAuto) {
    mode = options.fold_count * options.test_size == n ? SplitMode::kExhaustive
                                                       : SplitMode::kIndependent;
  }
  const bool exhaustive = mode == SplitMode::kExhaustive;
  if (exhaustive && options.fold_count * options.test_size > n) {
    throw Error(ErrorCode::kTooFewCases,
                std::to_string(options.fold_count) + " disjoint test sets of " +
                    std::to_string(options.test_size) + " need more than " +
                    std::to_string(n) + " cases");
  }

  std::vector<std::string> covariates = options.covariates;
  if (covariates.empty()) {
    covariates.assign(std::begin(kStandardCovariates),
                      std::end(kStandardCovariates));
  }
  const CovariateMatrix matrix = covariate_matrix(cases, covariates);

  SeededRng rng(options.seed);
  std::optional<Assignment> best;
  double best_score = std::numeric_limits<double>::infinity();
  double best_initial = 0.0;
  std::size_t best_accepted = 0;
  for (std::size_t r = 0; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    Assignment a(matrix, random_start(n, options.fold_count, options.test_size,
                                      exhaustive, rng));
    const double initial = a.score();
    const std::size_t accepted = refine(a, n, exhaustive, options.max_passes);
    const double score = a.score();
    if (score < best_score) {
      best_score = score;
      best_initial = initial;
      best_accepted = accepted;
      best.emplace(a);
    }
  }

  SplitPlan plan;
  plan.mode = mode;
  plan.covariates = covariates;
  plan.balance_score = balance_score(matrix, best->sets());
  plan.initial_score = best_initial;
  plan.accepted_swaps = best_accepted;
  plan.imputed = matrix.imputed;
  for (std::size_t f = 0; f < best->sets().size(); ++f) {
    std::vector<bool> is_test(n, false);
    for (std::size_t c : best->sets()[f]) is_test[c] = true;
    Fold fold;
    fold.name = "split" + std::to_string(f + 1);
    for (std::size_t c = 0; c < n; ++c) {
      (is_test[c] ? fold.test_ids : fold.train_ids).push_back(cases[c].case_id);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace phaseforge
