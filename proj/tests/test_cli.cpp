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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "maxwent/checkpoint.hpp"
#include "maxwent/data.hpp"
#include "maxwent/io.hpp"

using namespace maxwent;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code;
  std::string out, err;
};

const fs::path kWorkDir = fs::temp_directory_path() / "maxwent_cli_tests";

RunResult run_cli(const std::string& args) {
  fs::create_directories(kWorkDir);
  const fs::path out_file = kWorkDir / "stdout.txt";
  const fs::path err_file = kWorkDir / "stderr.txt";
  const std::string command = std::string(MAXWENT_CLI_PATH) + " " + args + " > " +
                              out_file.string() + " 2> " + err_file.string();
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WEXITSTATUS(status);
  result.out = read_text(out_file.string());
  result.err = read_text(err_file.string());
  return result;
}

std::string p(const std::string& name) { return (kWorkDir / name).string(); }

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("every subcommand documents itself and exits cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
  for (const std::string& sub :
       {"pretrain", "train", "eval", "clip-sweep", "benchmark", "verify"}) {
    const RunResult r = run_cli(sub + " --help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("--help") != std::string::npos);
  }
}

TEST_CASE("config errors exit with code 2 and a message") {
  const RunResult missing_out = run_cli("pretrain --dataset two-moons --seed 0");
  CHECK(missing_out.exit_code == 2);
  CHECK(!missing_out.err.empty());

  const RunResult unknown_flag = run_cli("pretrain --does-not-exist 1 --out " + p("x.json"));
  CHECK(unknown_flag.exit_code == 2);

  const RunResult bad_method = run_cli(
      "train --method nope --dataset two-moons --out " + p("x.json"));
  CHECK(bad_method.exit_code == 2);

  const RunResult missing_file = run_cli("eval --in " + p("missing.json") +
                                         " --dataset two-moons --out " + p("r.json"));
  CHECK(missing_file.exit_code == 2);
}

TEST_CASE("pretrained checkpoints are valid and byte-reproducible") {
  const std::string args = "pretrain --dataset two-moons --seed 0 --pretrain-iters 200 "
                           "--hidden 100,100,100 --out ";
  CHECK(run_cli(args + p("ck_a.json")).exit_code == 0);
  CHECK(run_cli(args + p("ck_b.json")).exit_code == 0);

  const CheckpointFile file = load_checkpoint(p("ck_a.json"));
  const Checkpoint& ckpt = file.single();
  CHECK(ckpt.spec.input_dim == 2);
  CHECK(ckpt.spec.hidden == std::vector<std::size_t>{100, 100, 100});
  CHECK(ckpt.spec.head == Head::BinaryClassification);
  // 2*100+100 + 100*100+100 + 100*100+100 + 100*1+1
  CHECK(ckpt.dist.dim() == 20601);
  CHECK(!ckpt.dist.stochastic());

  CHECK(read_text(p("ck_a.json")) == read_text(p("ck_b.json")));
}

TEST_CASE("entropy rises under training and falls without pressure") {
  REQUIRE(run_cli("pretrain --dataset two-moons --seed 0 --pretrain-iters 300 --hidden 24,24 "
                  "--out " + p("base.json")).exit_code == 0);

  REQUIRE(run_cli("train --method maxwent-svd --in " + p("base.json") +
                  " --dataset two-moons --seed 0 --iters 400 --lambda 10 --out " +
                  p("fit_svd.json") + " --log " + p("fit_svd.csv")).exit_code == 0);
  auto rows = read_csv_rows(p("fit_svd.csv"));
  REQUIRE(rows.size() >= 3);
  const double first = std::stod(rows[1][3]);
  const double last = std::stod(rows.back()[3]);
  CHECK(last > first);

  REQUIRE(run_cli("train --method maxwent --in " + p("base.json") +
                  " --dataset two-moons --seed 0 --iters 400 --lambda 0 --out " +
                  p("fit_zero.json") + " --log " + p("fit_zero.csv")).exit_code == 0);
  rows = read_csv_rows(p("fit_zero.csv"));
  const double first0 = std::stod(rows[1][3]);
  const double last0 = std::stod(rows.back()[3]);
  CHECK(last0 <= first0);
}

TEST_CASE("training reruns are byte-identical") {
  const std::string args = "train --method maxwent --dataset two-moons --seed 3 "
                           "--pretrain-iters 200 --iters 300 --hidden 16,16 --out ";
  REQUIRE(run_cli(args + p("rerun_a.json")).exit_code == 0);
  REQUIRE(run_cli(args + p("rerun_b.json")).exit_code == 0);
  CHECK(read_text(p("rerun_a.json")) == read_text(p("rerun_b.json")));
}

TEST_CASE("evaluation reports are byte-identical across reruns") {
  REQUIRE(run_cli("train --method maxwent --dataset two-moons --seed 1 --pretrain-iters 200 "
                  "--iters 300 --hidden 16,16 --out " + p("eval_fit.json")).exit_code == 0);
  const std::string args = "eval --in " + p("eval_fit.json") +
                           " --dataset two-moons --seed 1 --p 10";
  REQUIRE(run_cli(args + " --out " + p("rep_a.json") + " --scores " + p("sc_a.csv"))
              .exit_code == 0);
  REQUIRE(run_cli(args + " --out " + p("rep_b.json") + " --scores " + p("sc_b.csv"))
              .exit_code == 0);
  CHECK(read_text(p("rep_a.json")) == read_text(p("rep_b.json")));
  CHECK(read_text(p("sc_a.csv")) == read_text(p("sc_b.csv")));
  CHECK(read_text(p("rep_a.json")).find("\"method\": \"maxwent\"") != std::string::npos);
}

TEST_CASE("clip level zero reproduces the deterministic network's scores") {
  REQUIRE(run_cli("pretrain --dataset two-moons --seed 2 --pretrain-iters 200 --hidden 16,16 "
                  "--out " + p("van.json")).exit_code == 0);
  REQUIRE(run_cli("train --method maxwent --in " + p("van.json") +
                  " --dataset two-moons --seed 2 --iters 300 --out " + p("clip_fit.json"))
              .exit_code == 0);

  REQUIRE(run_cli("eval --in " + p("clip_fit.json") +
                  " --dataset two-moons --seed 2 --p 10 --clip 0 --out " + p("cr.json") +
                  " --scores " + p("clip_scores.csv")).exit_code == 0);
  REQUIRE(run_cli("eval --in " + p("van.json") +
                  " --dataset two-moons --seed 2 --p 10 --out " + p("vr.json") + " --scores " +
                  p("van_scores.csv")).exit_code == 0);
  CHECK(read_text(p("clip_scores.csv")) == read_text(p("van_scores.csv")));
}

TEST_CASE("stochastic ensembles train per-member and evaluate as a pool") {
  REQUIRE(run_cli("train --method maxwent --m 2 --dataset two-moons --seed 6 "
                  "--pretrain-iters 150 --iters 150 --hidden 8,8 --out " + p("ens_fit.json"))
              .exit_code == 0);
  const CheckpointFile file = load_checkpoint(p("ens_fit.json"));
  REQUIRE(file.is_ensemble());
  CHECK(file.members.size() == 2);
  CHECK(file.members[0].dist.mean != file.members[1].dist.mean);

  CHECK(run_cli("eval --in " + p("ens_fit.json") +
                " --dataset two-moons --seed 6 --p 5 --out " + p("ens_rep.json"))
            .exit_code == 0);
  CHECK(read_text(p("ens_rep.json")).find("maxwent-x2") != std::string::npos);

  // a supplied center contradicts per-member pretraining
  CHECK(run_cli("train --method maxwent --m 2 --in " + p("ens_fit.json") +
                " --dataset two-moons --seed 6 --out " + p("bad.json")).exit_code == 2);
}

TEST_CASE("clip sweep covers the standard levels in order") {
  REQUIRE(run_cli("train --method maxwent --dataset two-moons --seed 4 --pretrain-iters 200 "
                  "--iters 200 --hidden 16,16 --out " + p("sw_fit.json")).exit_code == 0);
  REQUIRE(run_cli("clip-sweep --in " + p("sw_fit.json") +
                  " --dataset two-moons --seed 4 --p 5 --out " + p("sweep.csv")).exit_code == 0);
  const auto rows = read_csv_rows(p("sweep.csv"));
  REQUIRE(rows.size() == 10);
  CHECK(rows[0] == std::vector<std::string>{"clip", "mean_uncertainty_id",
                                            "mean_uncertainty_ood", "auroc"});
  CHECK(rows[1][0] == "inf");
  CHECK(rows[9][0] == "0");
}

TEST_CASE("benchmark emits one report per method and split plus a summary") {
  const Dataset table = gen_correlated_tabular(120, 9);
  save_csv(p("bench.csv"), table);
  const RunResult r = run_cli(
      "benchmark --data " + p("bench.csv") + " --target y --seed 0 --out " + p("bench_out") +
      " --methods vanilla,maxwent --splits extrapolation,interpolation --hidden 8,8 "
      "--pretrain-iters 150 --iters 150 --batch 32 --p 5");
  CHECK(r.exit_code == 0);
  for (const std::string& split : {"extrapolation", "interpolation"})
    for (const std::string& method : {"vanilla", "maxwent"}) {
      CHECK(fs::exists(p("bench_out") + "/bench_" + split + "_" + method + ".report.json"));
      CHECK(fs::exists(p("bench_out") + "/bench_" + split + "_" + method + ".scores.csv"));
    }
  CHECK(fs::exists(p("bench_out") + "/manifest.json"));
  const auto summary = read_csv_rows(p("bench_out") + "/summary.csv");
  REQUIRE(summary.size() == 5);
  for (std::size_t i = 1; i < summary.size(); ++i) CHECK(summary[i].back() == "ok");
}

TEST_CASE("benchmark exits with a failure code when every job fails") {
  const Dataset table = gen_correlated_tabular(60, 10);
  save_csv(p("bench_bad.csv"), table);
  const RunResult r = run_cli(
      "benchmark --data " + p("bench_bad.csv") + " --target y --seed 0 --out " +
      p("bench_bad_out") + " --methods maxwent --splits extrapolation --hidden 8 "
      "--pretrain-iters 50 --iters 50 --lambda -1");
  CHECK(r.exit_code == 3);
  const auto summary = read_csv_rows(p("bench_bad_out") + "/summary.csv");
  REQUIRE(summary.size() == 2);
  CHECK(summary[1].back().find("error") != std::string::npos);
}

TEST_CASE("verify passes and the negative control fails") {
  const RunResult ok = run_cli("verify");
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("checks passed") != std::string::npos);
  const RunResult bad = run_cli("verify --inject-lambda-mismatch");
  CHECK(bad.exit_code == 3);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}
