/*
 * Copyright 2026 The maxwent authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MAXWENT_REPORT_HPP_
#define MAXWENT_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxwent/common.hpp"
#include "maxwent/io.hpp"

namespace maxwent {

struct EvalReport {
  std::string method;
  std::string dataset;
  std::string split;
  double auroc = 0.0;
  double fpr95 = 0.0;
  double test_nll = 0.0;
  std::size_t p = 0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  std::uint64_t seed = 0;
  double clip = kInf;
  std::string note;  // optional free-form remark (e.g. non-binding references)
};

inline nlohmann::ordered_json eval_report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["dataset"] = r.dataset;
  j["split"] = r.split;
  j["auroc"] = r.auroc;
  j["fpr95"] = r.fpr95;
  j["test_nll"] = r.test_nll;
  j["p"] = r.p;
  j["seed"] = r.seed;
  j["n_id"] = r.n_id;
  j["n_ood"] = r.n_ood;
  if (r.clip == kInf)
    j["clip"] = nullptr;
  else
    j["clip"] = r.clip;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline void write_eval_report(const std::string& path, const EvalReport& r) {
  atomic_write_text(path, eval_report_to_json(r).dump(2) + "\n");
}

/// Per-sample scores: id rows first (is_ood 0), then ood rows (is_ood 1).
inline std::string scores_csv(const std::vector<double>& scores_id,
                              const std::vector<double>& scores_ood) {
  std::string out = "id,is_ood,uncertainty\n";
  std::size_t row = 0;
  for (double s : scores_id)
    out += std::to_string(row++) + ",0," + format_double(s) + "\n";
  for (double s : scores_ood)
    out += std::to_string(row++) + ",1," + format_double(s) + "\n";
  return out;
}

inline void write_scores_csv(const std::string& path, const std::vector<double>& scores_id,
                             const std::vector<double>& scores_ood) {
  atomic_write_text(path, scores_csv(scores_id, scores_ood));
}

/// Provenance manifest for a dataset/split combination.
struct DataManifest {
  std::string source;         // generator name or CSV path
  std::string target_column;  // empty for generated data
  std::string split;
  std::uint64_t seed = 0;
  std::string ood_fixture;    // description of a synthetic OOD set, if any
};

inline nlohmann::ordered_json manifest_to_json(const DataManifest& m) {
  nlohmann::ordered_json j;
  j["source"] = m.source;
  j["target_column"] = m.target_column.empty() ? nlohmann::ordered_json(nullptr)
                                               : nlohmann::ordered_json(m.target_column);
  j["split"] = m.split;
  j["seed"] = m.seed;
  j["ood_fixture"] = m.ood_fixture.empty() ? nlohmann::ordered_json(nullptr)
                                           : nlohmann::ordered_json(m.ood_fixture);
  return j;
}

inline void write_manifest(const std::string& path, const DataManifest& m) {
  atomic_write_text(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace maxwent

#endif  // MAXWENT_REPORT_HPP_
