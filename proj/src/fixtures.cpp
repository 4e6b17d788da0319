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

#include "phaseforge/fixtures.hpp"

#include "phaseforge/error.hpp"
#include "phaseforge/formats.hpp"

namespace phaseforge {
namespace {

constexpr const char* kModels[] = {"2D-CNN-LSTM", "3D-ResNet", "ECO"};

ApGrid phase_grid(const std::vector<PhaseId>& ids,
                  const std::vector<std::vector<double>>& rows) {
  ApGrid grid;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      grid[kModels[m]][std::to_string(ids[i])] = rows[m][i];
    }
  }
  return grid;
}

}  // namespace

const SplitApTable& table1_aps() {
  // Cells printed as "a/b/c" for annotations 1/2/3; split 3 annotation 3 of
  // the 2D model is printed with two decimals.
  static const SplitApTable table{
      "cholecystectomy cross-validation AP per split and annotation "
      "(6 folds, annotations 1-3) with printed mAP column",
      {
          {"2D-CNN-LSTM", "Ann1", {65.8, 59.2, 51.1, 51.7, 70.9, 67.8}, 61.1},
          {"2D-CNN-LSTM", "Ann2", {66.1, 60.4, 37.8, 48.1, 70.3, 72.0}, 59.1},
          {"2D-CNN-LSTM", "Ann3", {62.3, 58.5, 51.59, 57.1, 68.0, 68.6}, 61.0},
          {"3D-ResNet", "Ann1", {67.8, 49.9, 52.3, 52.5, 73.5, 66.7}, 60.5},
          {"3D-ResNet", "Ann2", {73.2, 61.3, 51.1, 53.1, 68.7, 65.1}, 61.5},
          {"3D-ResNet", "Ann3", {72.9, 60.6, 57.1, 46.3, 72.9, 62.9}, 67.6},
          {"ECO", "Ann1", {74.1, 64.4, 45.6, 57.3, 71.5, 69.6}, 63.8},
          {"ECO", "Ann2", {75.0, 70.9, 49.1, 60.3, 71.5, 67.7}, 65.7},
          {"ECO", "Ann3", {69.1, 65.5, 46.9, 55.9, 73.5, 68.6}, 63.2},
      }};
  return table;
}

const ConsensusApTable& table2_aps() {
  static const ConsensusApTable table = [] {
    struct Row {
      const char* model;
      const char* split;
      const char* ap[4];
      const char* delta[4];
      const char* consensus;
    };
    static constexpr Row kRows[] = {
        {"2D-CNN-LSTM", "Split1", {"65.07", "63.23", "67.38", "64.77"},
         {"+2.49", "+4.33", "+0.18", "+2.79"}, "67.56"},
        {"2D-CNN-LSTM", "Split2", {"59.32", "62.21", "60.21", "55.72"},
         {"+4.81", "+1.92", "+3.92", "+8.41"}, "64.13"},
        {"2D-CNN-LSTM", "Split3", {"68.59", "68.8", "67.59", "68.57"},
         {"+3.05", "+2.84", "+4.05", "+3.07"}, "71.64"},
        {"3D-ResNet", "Split1", {"68.31", "67.52", "67.54", "65.34"},
         {"+1.98", "+2.77", "+2.75", "+4.95"}, "70.29"},
        {"3D-ResNet", "Split2", {"66.84", "64.68", "68.29", "62.46"},
         {"+3.11", "+5.27", "+1.66", "+7.49"}, "69.95"},
        {"3D-ResNet", "Split3", {"72.4", "72.25", "74.31", "74.16"},
         {"+4.79", "+4.94", "+2.88", "+3.03"}, "77.19"},
        {"ECO", "Split1", {"64.97", "63.89", "66.39", "67.13"},
         {"+4.69", "+5.77", "+3.27", "+2.53"}, "69.66"},
        {"ECO", "Split2", {"60.46", "61.85", "61.26", "60.5"},
         {"+4.76", "+3.37", "+3.96", "+4.72"}, "65.22"},
        {"ECO", "Split3", {"71.45", "70.73", "72.79", "72.28"},
         {"+4.1", "+4.82", "+2.76", "+3.27"}, "75.55"},
    };
    ConsensusApTable t;
    t.provenance =
        "gastrectomy averaged AP per model, split and annotation (4 "
        "annotators plus consensus) with printed Con-Ann deltas";
    for (const Row& r : kRows) {
      for (int a = 0; a < 4; ++a) {
        const std::string ann = "Ann" + std::to_string(a + 1);
        t.results[{r.model, r.split, ann}] = Decimal::parse(r.ap[a]);
        t.printed_deltas[{r.model, r.split, ann}] = Decimal::parse(r.delta[a]);
      }
      t.results[{r.model, r.split, std::string(kConsensusAnnotation)}] =
          Decimal::parse(r.consensus);
    }
    return t;
  }();
  return table;
}

const PhaseApTable& supp_table3_aps() {
  static const PhaseApTable table = [] {
    PhaseApTable t;
    t.provenance =
        "generalization AP per surgical phase and model for both surgeries";
    t.cholecystectomy = phase_grid(
        {0, 1, 2, 3, 4, 5, 6},
        {
            {71.8, 74.1, 36.5, 44.7, 56.8, 57.1, 37.7},
            {78.7, 76.7, 30.6, 37.6, 60.1, 53.7, 23.4},
            {75.8, 72.0, 42.3, 57.8, 69.2, 59.4, 44.9},
        });
    std::vector<PhaseId> ids;
    for (PhaseId id = 1; id <= 27; ++id) ids.push_back(id);
    t.gastrectomy = phase_grid(
        ids,
        {
            {64.0, 58.5, 31.2, 81.2, 74.1, 50.2, 37.9, 62.4, 60.9,
             76.3, 47.2, 39.3, 0.3,  23.3, 49.7, 38.5, 74.1, 72.5,
             53.8, 75.6, 26.9, 13.2, 76.1, 59.6, 33.1, 0.3,  0.0},
            {60.6, 69.7, 40.5, 72.8, 76.1, 55.9, 57.8, 53.7, 62.5,
             76.4, 52.1, 22.7, 0.4,  62.1, 31.9, 31.2, 67.4, 90.1,
             70.7, 51.4, 53.4, 30.8, 49.0, 27.8, 71.3, 5.7,  3.8},
            {70.3, 66.8, 32.2, 76.6, 72.7, 32.9, 57.4, 54.5, 72.7,
             82.8, 54.0, 26.4, 3.3,  55.8, 32.0, 23.2, 76.2, 91.0,
             54.9, 62.0, 10.6, 25.4, 88.6, 30.0, 64.0, 4.0,  0.0},
        });
    return t;
  }();
  return table;
}

Fixture load_fixture(std::string_view name) {
  if (name == "cholec_taxonomy") {
    return TaxonomyFixture{"cholecystectomy phases redefined by expert consensus",
                           cholecystectomy_taxonomy()};
  }
  if (name == "gastrectomy_taxonomy") {
    return TaxonomyFixture{
        "subtotal gastrectomy phases; ids 1-21 surgical, 22-27 non-gastrectomy",
        gastrectomy_taxonomy()};
  }
  if (name == "table1_aps") return table1_aps();
  if (name == "table2_aps") return table2_aps();
  if (name == "supp_table3_aps") return supp_table3_aps();
  throw Error(ErrorCode::kNotFound, "unknown fixture '" + std::string(name) + "'");
}

nlohmann::json fixture_json(std::string_view name) {
  using nlohmann::json;
  const Fixture fixture = load_fixture(name);
  json out = {{"name", name}};
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        out["provenance"] = f.provenance;
        if constexpr (std::is_same_v<T, TaxonomyFixture>) {
          out["value"] = to_json(f.taxonomy);
        } else if constexpr (std::is_same_v<T, SplitApTable>) {
          json rows = json::array();
          for (const auto& r : f.rows) {
            rows.push_back({{"model", r.model},
                            {"annotation", r.annotation},
                            {"split_aps", r.split_aps},
                            {"reported_map", r.reported_map}});
          }
          out["value"] = rows;
        } else if constexpr (std::is_same_v<T, ConsensusApTable>) {
          json cells = json::array();
          for (const auto& [key, ap] : f.results) {
            json cell = {{"model", key.model},
                         {"split", key.split},
                         {"annotation", key.annotation},
                         {"ap", ap.to_string()}};
            if (auto it = f.printed_deltas.find(key);
                it != f.printed_deltas.end()) {
              cell["printed_delta"] = it->second.display(2, true);
            }
            cells.push_back(cell);
          }
          out["value"] = cells;
        } else {
          out["value"] = {{"cholecystectomy", f.cholecystectomy},
                          {"gastrectomy", f.gastrectomy}};
        }
      },
      fixture);
  return out;
}

}  // namespace phaseforge
