/*
 * Copyright 2026 The oxmc Authors.
 *
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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oxmc/cli.hpp"
#include "oxmc/dataset.hpp"
#include "oxmc/model.hpp"
#include "support.hpp"

using namespace oxmc;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors and help") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
    CHECK(run({"train"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"train", "--data", "/nonexistent/file", "--out", "x"}).code == 2);
    CHECK(run({"synth", "--planted", "--out", "x", "--mode", "sideways"}).code == 2);
}

TEST_CASE("runtime errors exit with one") {
    oxmc::testing::ScratchDir dir("cli_err");
    std::ofstream(dir / "bad.txt") << "2 3 2\n0 0:1\n";
    const auto r = run({"train", "--data", (dir / "bad.txt").string(), "--out", (dir / "m").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.txt:3") != std::string::npos);
}

TEST_CASE("end-to-end pipeline") {
    oxmc::testing::ScratchDir dir("cli");
    const auto p = [&](const std::string& leaf) { return (dir / leaf).string(); };
    REQUIRE(run({"synth", "--planted", "--n", "400", "--labels", "100", "--dim", "300", "--seed", "3", "--data",
                 p("base.txt"), "--out", p("fused.txt"), "--k", "5"})
                .code == 0);
    CHECK(load_dataset(p("fused.txt")).L() == 20);
    std::ifstream mapping(p("fused.txt") + ".mapping");
    std::string first;
    std::getline(mapping, first);
    CHECK(first.rfind("0: ", 0) == 0);

    REQUIRE(run({"train", "--data", p("fused.txt"), "--out", p("m"), "--branch", "4", "--max-leaf", "4", "--beam",
                 "2"})
                .code == 0);
    const auto model = load_model(p("m"));
    CHECK(model.info.branching == 4);
    CHECK(model.beam == 2);

    const auto refine = run({"refine", "--model", p("m"), "--data", p("fused.txt"), "--lambda", "2", "--out", p("r")});
    REQUIRE(refine.code == 0);
    CHECK(refine.out.find("round=1 relaxed=") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "r" / "refine_log.txt"));
    CHECK(load_model(p("r")).lambda == 2);

    CHECK(run({"refine", "--model", p("m"), "--data", p("fused.txt"), "--rlap", "--out", p("rl")}).code == 0);
    CHECK(run({"refine", "--model", p("m"), "--data", p("fused.txt"), "--random-baseline", "--out", p("rd")}).code ==
          0);
    CHECK(run({"refine", "--model", p("m"), "--data", p("fused.txt"), "--xi", "3"}).code == 2);

    REQUIRE(run({"predict", "--model", p("m"), "--data", p("fused.txt"), "--topk", "5", "--out", p("pm.txt")}).code ==
            0);
    REQUIRE(run({"predict", "--model", p("r"), "--data", p("fused.txt"), "--topk", "5", "--out", p("pr.txt")}).code ==
            0);
    const auto preds = load_predictions(p("pm.txt"));
    CHECK(preds.size() == 400);
    CHECK(preds[0].labels.size() <= 5);

    const auto eval = run({"eval", "--pred", p("pm.txt"), "--pred", p("pr.txt"), "--gold", p("fused.txt"), "--csv"});
    REQUIRE(eval.code == 0);
    CHECK(eval.out.rfind("model,P@1,P@3,P@5,PSP@1,PSP@3,PSP@5\npm,", 0) == 0);
    CHECK(eval.out.find("\npr,") != std::string::npos);

    const auto sweep = run({"sweep-lambda", "--model", p("m"), "--data", p("fused.txt"), "--lambda-max", "3"});
    REQUIRE(sweep.code == 0);
    std::istringstream lines(sweep.out);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 4);
}

}  // TEST_SUITE
