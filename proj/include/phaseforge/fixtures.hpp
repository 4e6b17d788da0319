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

// Published reference values, transcribed by hand and frozen. Each fixture
// carries a provenance note describing what was transcribed.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "phaseforge/evaluation.hpp"
#include "phaseforge/label_model.hpp"

namespace phaseforge {

// Per-split APs (six cholecystectomy folds) and the printed mAP for one
// (model, annotation) pair.
struct SplitApRow {
  std::string model;
  std::string annotation;
  std::vector<double> split_aps;
  double reported_map = 0.0;
};

struct SplitApTable {
  std::string provenance;
  std::vector<SplitApRow> rows;
};

// Gastrectomy APs per (model, split, annotation | consensus) together with
// the printed consensus-minus-annotation deltas.
struct ConsensusApTable {
  std::string provenance;
  ResultSet results;
  ResultSet printed_deltas;  // annotation ids only
};

// Per-phase generalization APs, model -> phase id (as text) -> AP.
struct PhaseApTable {
  std::string provenance;
  ApGrid cholecystectomy;
  ApGrid gastrectomy;
};

struct TaxonomyFixture {
  std::string provenance;
  PhaseTaxonomy taxonomy;
};

using Fixture =
    std::variant<TaxonomyFixture, SplitApTable, ConsensusApTable, PhaseApTable>;

inline constexpr std::string_view kFixtureNames[] = {
    "cholec_taxonomy", "gastrectomy_taxonomy", "table1_aps", "table2_aps",
    "supp_table3_aps"};

const SplitApTable& table1_aps();
const ConsensusApTable& table2_aps();
const PhaseApTable& supp_table3_aps();

// Throws kNotFound for names outside kFixtureNames.
Fixture load_fixture(std::string_view name);
nlohmann::json fixture_json(std::string_view name);

}  // namespace phaseforge
