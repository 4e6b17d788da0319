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

#pragma once

// Covariate-balanced cross-validation planning over case metadata.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phaseforge {

enum class RecordingSystem { kSi, kXi, kOther };

std::string_view recording_system_name(RecordingSystem system);
std::optional<RecordingSystem> parse_recording_system(std::string_view name);

struct CaseMetadata {
  std::string case_id;
  std::optional<double> age;
  std::optional<double> operation_minutes;
  std::optional<double> bleeding_ml;  // estimated blood loss
  std::optional<double> bmi;
  RecordingSystem recording_system = RecordingSystem::kOther;
  std::map<std::string, double> extra;

  // Value of a named covariate: one of the four standard fields or an
  // `extra` key.
  std::optional<double> covariate(std::string_view name) const;

  friend bool operator==(const CaseMetadata&, const CaseMetadata&) = default;
};

inline constexpr std::string_view kStandardCovariates[] = {
    "age", "operation_minutes", "bleeding_ml", "bmi"};

enum class SplitMode {
  kAuto,         // exhaustive when fold_count * test_size == case count
  kExhaustive,   // test sets partition the cohort
  kIndependent,  // each fold's test set is drawn on its own; folds may share
                 // test cases
};

struct SplitOptions {
  std::size_t fold_count = 1;
  std::size_t test_size = 1;
  std::vector<std::string> covariates;  // empty = the four standard ones
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kAuto;
  std::size_t restarts = 8;
  std::size_t max_passes = 200;
};

struct Fold {
  std::string name;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;

  friend bool operator==(const Fold&, const Fold&) = default;
};

struct ImputedValue {
  std::string case_id;
  std::string covariate;
  double value = 0.0;

  friend bool operator==(const ImputedValue&, const ImputedValue&) = default;
};

struct SplitPlan {
  SplitMode mode = SplitMode::kExhaustive;
  std::vector<std::string> covariates;
  std::vector<Fold> folds;
  double balance_score = 0.0;
  double initial_score = 0.0;  // best seeded start, before refinement
  std::size_t accepted_swaps = 0;
  std::vector<ImputedValue> imputed;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

// Column-wise covariate matrix after mean imputation, normalized so each
// covariate spans [0, 1] over the cohort (constant covariates become 0).
struct CovariateMatrix {
  std::size_t cases = 0;
  std::size_t covariates = 0;
  std::vector<double> values;  // row-major [case][covariate]
  std::vector<ImputedValue> imputed;

  double at(std::size_t c, std::size_t v) const {
    return values[c * covariates + v];
  }
};

// Throws kUnknownCovariate when no case carries a named covariate.
CovariateMatrix covariate_matrix(std::span<const CaseMetadata> cases,
                                 std::span<const std::string> covariates);

// Max over covariates of (max - min) over folds of the test-set mean, on the
// normalized matrix. test_sets hold case indices.
double balance_score(const CovariateMatrix& matrix,
                     std::span<const std::vector<std::size_t>> test_sets);

// Seeded random start plus greedy test/train swaps that each strictly lower
// the balance score. Throws kTooFewCases, kUnknownCovariate,
// kInvalidArgument.
SplitPlan stratified_splits(std::span<const CaseMetadata> cases,
                            const SplitOptions& options);

std::string_view split_mode_name(SplitMode mode);

// Deterministic, platform-independent helpers around std::mt19937_64 (the
// standard distributions are implementation-defined, so they are avoided).
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace phaseforge
