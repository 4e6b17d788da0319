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

#include "phaseforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "phaseforge/error.hpp"

namespace phaseforge {
namespace {

struct Overlap {
  std::size_t first_frame = 0;  // absolute frame index
  std::size_t end_frame = 0;    // exclusive
  std::size_t size() const { return end_frame - first_frame; }
};

Overlap overlap_of(const PredictionLog& log, const FrameTrack& truth) {
  const std::int64_t lo = std::max<std::int64_t>(0, log.frame_offset());
  const std::int64_t hi =
      std::min<std::int64_t>(static_cast<std::int64_t>(truth.size()),
                             log.frame_offset() +
                                 static_cast<std::int64_t>(log.num_frames()));
  if (hi <= lo) {
    throw Error(ErrorCode::kNoOverlap,
                "prediction log and truth share no frames");
  }
  Overlap o{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  for (std::size_t f = o.first_frame; f < o.end_frame; ++f) {
    if (!truth.labels[f]) {
      throw Error(ErrorCode::kBlankInTrack,
                  "truth is BLANK at frame " + std::to_string(f));
    }
  }
  return o;
}

std::size_t log_row_of(const PredictionLog& log, std::size_t frame) {
  return frame - static_cast<std::size_t>(log.frame_offset());
}

std::int64_t pow10(int e) {
  std::int64_t v = 1;
  while (e-- > 0) v *= 10;
  return v;
}

}  // namespace

PredictionLog::PredictionLog(std::string case_id, std::size_t num_phases,
                             std::vector<double> values,
                             std::int64_t frame_offset,
                             std::vector<PhaseId> column_phase_ids)
    : case_id_(std::move(case_id)),
      num_phases_(num_phases),
      frame_offset_(frame_offset),
      column_ids_(std::move(column_phase_ids)),
      values_(std::move(values)) {
  if (num_phases_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "prediction log needs C >= 1");
  }
  if (values_.size() % num_phases_ != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "value count is not a multiple of the phase count");
  }
  if (column_ids_.empty()) {
    column_ids_.resize(num_phases_);
    std::iota(column_ids_.begin(), column_ids_.end(), 0);
  } else if (column_ids_.size() != num_phases_) {
    throw Error(ErrorCode::kInvalidArgument,
                "column id count differs from the phase count");
  }
  if (std::set<PhaseId>(column_ids_.begin(), column_ids_.end()).size() !=
      column_ids_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate column phase id");
  }
  normalized_ = true;
  for (std::size_t i = 0; i < num_frames(); ++i) {
    double sum = 0.0;
    for (double v : row(i)) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNumericError,
                    "non-finite confidence in row " + std::to_string(i));
      }
      if (v < 0.0) normalized_ = false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance) normalized_ = false;
  }
}

std::optional<std::size_t> PredictionLog::column_of(PhaseId id) const {
  auto it = std::find(column_ids_.begin(), column_ids_.end(), id);
  if (it == column_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_ids_.begin());
}

PredictionLog PredictionLog::bound_to(const PhaseTaxonomy& taxonomy) const {
  if (taxonomy.size() != num_phases_) {
    throw Error(ErrorCode::kInvalidArgument,
                "log has " + std::to_string(num_phases_) +
                    " columns but taxonomy has " +
                    std::to_string(taxonomy.size()) + " phases");
  }
  PredictionLog copy = *this;
  copy.column_ids_ = taxonomy.ids();
  return copy;
}

std::size_t argmax_column(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

CrossEntropyResult cross_entropy(const PredictionLog& log,
                                 const FrameTrack& truth) {
  if (!log.normalized()) {
    throw Error(ErrorCode::kNotNormalized,
                "cross-entropy requires rows that sum to 1");
  }
  const Overlap o = overlap_of(log, truth);
  double total = 0.0;  // sum of -ln p; stays +0 for a perfect log
  for (std::size_t f = o.first_frame; f < o.end_frame; ++f) {
    const PhaseId t = *truth.labels[f];
    const auto col = log.column_of(t);
    if (!col) {
      throw Error(ErrorCode::kUnknownPhase,
                  "truth phase " + std::to_string(t) + " has no log column");
    }
    const double p = log.row(log_row_of(log, f))[*col];
    total -= std::log(std::max(p, kConfidenceFloor));
  }
  return {total / static_cast<double>(o.size()), o.size()};
}

std::optional<double> phase_ap(const PredictionLog& log,
                               const FrameTrack& truth, PhaseId phase) {
  const auto col = log.column_of(phase);
  if (!col) {
    throw Error(ErrorCode::kUnknownPhase,
                "phase " + std::to_string(phase) + " has no log column");
  }
  const Overlap o = overlap_of(log, truth);

  struct Ranked {
    double score;
    std::size_t frame;
    bool positive;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(o.size());
  std::size_t positives = 0;
  for (std::size_t f = o.first_frame; f < o.end_frame; ++f) {
    const bool pos = *truth.labels[f] == phase;
    positives += pos;
    ranked.push_back({log.row(log_row_of(log, f))[*col], f, pos});
  }
  if (positives == 0) return std::nullopt;

  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.frame < b.frame;
  });
  double sum_precision = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (!ranked[r].positive) continue;
    ++hits;
    sum_precision += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum_precision / static_cast<double>(positives);
}

EvalReport eval_report(const PredictionLog& log, const FrameTrack& truth,
                       const PhaseTaxonomy& taxonomy) {
  const PredictionLog bound = log.bound_to(taxonomy);
  const Overlap o = overlap_of(bound, truth);
  const std::size_t c = taxonomy.size();

  EvalReport report;
  report.phase_ids = taxonomy.ids();
  report.confusion.assign(c, std::vector<std::uint64_t>(c, 0));
  report.support.assign(c, 0);
  report.evaluated_frames = o.size();
  for (std::size_t f = o.first_frame; f < o.end_frame; ++f) {
    const auto truth_idx = taxonomy.index_of(*truth.labels[f]);
    if (!truth_idx) {
      throw Error(ErrorCode::kUnknownPhase,
                  "truth phase " + std::to_string(*truth.labels[f]) +
                      " at frame " + std::to_string(f) +
                      " is not in the taxonomy");
    }
    ++report.support[*truth_idx];
    ++report.confusion[*truth_idx]
                      [argmax_column(bound.row(log_row_of(bound, f)))];
  }

  double sum = 0.0;
  std::size_t defined = 0;
  for (PhaseId id : report.phase_ids) {
    auto ap = phase_ap(bound, truth, id);
    if (ap) {
      sum += *ap;
      ++defined;
    } else {
      report.absent_phases.push_back(id);
    }
    report.per_phase_ap.push_back(ap);
  }
  report.map_value = defined == 0 ? 0.0 : sum / static_cast<double>(defined);
  return report;
}

Decimal Decimal::parse(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::kNumericError,
                 "'" + std::string(text) + "' is not a decimal number");
  };
  std::size_t i = 0;
  while (i < text.size() && text[i] == ' ') ++i;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
    while (i < text.size() && text[i] == ' ') ++i;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++digits) {
    if (whole > 9'000'000'000LL) throw fail();
    whole = whole * 10 + (text[i] - '0');
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool round_up = false;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++digits) {
      if (frac_digits < 9) {
        frac = frac * 10 + (text[i] - '0');
        ++frac_digits;
      } else if (frac_digits == 9) {
        round_up = text[i] >= '5';
        ++frac_digits;
      }
    }
  }
  while (i < text.size() && text[i] == ' ') ++i;
  if (digits == 0 || i != text.size()) throw fail();
  frac *= pow10(9 - std::min(frac_digits, 9));
  std::int64_t units = whole * kScale + frac + (round_up ? 1 : 0);
  return from_units(negative ? -units : units);
}

Decimal Decimal::from_double(double value) {
  if (!std::isfinite(value) || std::abs(value) > 9e9) {
    throw Error(ErrorCode::kNumericError, "value out of decimal range");
  }
  return from_units(std::llround(value * static_cast<double>(kScale)));
}

std::string Decimal::display(int places, bool signed_display) const {
  places = std::clamp(places, 0, 9);
  const std::int64_t step = pow10(9 - places);
  const std::int64_t magnitude = units_ < 0 ? -units_ : units_;
  const std::int64_t rounded = (magnitude + step / 2) / step;
  const std::int64_t unit = pow10(places);
  std::string out;
  if (units_ < 0 && rounded != 0) {
    out = "-";
  } else if (signed_display) {
    out = "+";
  }
  out += std::to_string(rounded / unit);
  if (places > 0) {
    std::string frac = std::to_string(rounded % unit);
    out += "." + std::string(static_cast<std::size_t>(places) - frac.size(),
                             '0') +
           frac;
  }
  return out;
}

std::string Decimal::to_string() const {
  std::string s = display(9);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

DeltaTable delta_table(const ResultSet& results) {
  std::map<std::pair<std::string, std::string>, DeltaRow> rows;
  for (const auto& [key, ap] : results) {
    auto& row = rows[{key.model, key.split}];
    row.model = key.model;
    row.split = key.split;
    if (key.annotation == kConsensusAnnotation) {
      row.consensus_ap = ap;
    } else {
      row.ap_by_annotation[key.annotation] = ap;
    }
  }
  DeltaTable table;
  for (auto& [id, row] : rows) {
    const ResultKey consensus_key{id.first, id.second,
                                  std::string(kConsensusAnnotation)};
    if (!results.contains(consensus_key)) {
      throw Error(ErrorCode::kMissingConsensus,
                  "no consensus AP for model '" + id.first + "', split '" +
                      id.second + "'");
    }
    for (const auto& [annotation, ap] : row.ap_by_annotation) {
      row.deltas[annotation] = row.consensus_ap - ap;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::map<std::string, double> mean_delta_by_model(const DeltaTable& table) {
  std::map<std::string, std::pair<std::int64_t, std::size_t>> acc;
  for (const auto& row : table.rows) {
    auto& [sum, count] = acc[row.model];
    for (const auto& [annotation, delta] : row.deltas) {
      sum += delta.units();
      ++count;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [model, sc] : acc) {
    out[model] = sc.second == 0
                     ? 0.0
                     : static_cast<double>(sc.first) /
                           static_cast<double>(sc.second) / Decimal::kScale;
  }
  return out;
}

ConsistencyResult consistency_check(std::span<const double> split_aps,
                                    double reported_map, double tolerance) {
  if (split_aps.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "consistency check needs at least one split AP");
  }
  const double mean = std::accumulate(split_aps.begin(), split_aps.end(), 0.0) /
                      static_cast<double>(split_aps.size());
  return {mean, std::abs(mean - reported_map) <= tolerance};
}

DeviationReport deviation_report(const ApGrid& aps) {
  DeviationReport report;
  if (aps.empty()) return report;
  const auto& reference = aps.begin()->second;
  for (const auto& [model, by_key] : aps) {
    bool same = by_key.size() == reference.size();
    for (auto a = by_key.begin(), b = reference.begin();
         same && a != by_key.end(); ++a, ++b) {
      same = a->first == b->first;
    }
    if (!same) {
      throw Error(ErrorCode::kKeyMismatch,
                  "model '" + model + "' does not share the key set of '" +
                      aps.begin()->first + "'");
    }
  }
  for (const auto& [key, unused] : reference) {
    DeviationEntry entry;
    for (const auto& [model, by_key] : aps) entry.total_ap += by_key.at(key);
    entry.total_ap /= static_cast<double>(aps.size());
    for (const auto& [model, by_key] : aps) {
      entry.deviations[model] = by_key.at(key) - entry.total_ap;
    }
    report.by_key[key] = std::move(entry);
  }
  return report;
}

}  // namespace phaseforge
