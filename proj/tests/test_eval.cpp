/*
 * Copyright 2026 The trafficseq Authors.
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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "trafficseq/error.hpp"
#include "trafficseq/eval.hpp"
#include "trafficseq/synthgen.hpp"

using namespace trafficseq;
using namespace trafficseq::eval;
using neuralseq::ModelKind;

namespace {

// Four days of synthetic traffic, split 3 + 1, with a tiny model budget.
struct Small {
  TimeSeries series;
  ExperimentOptions opt;
};

Small small_setup(std::uint64_t seed = 4) {
  SynthConfig sc;
  sc.days = 4;
  sc.seed = seed;
  sc.anomaly_rate = 0.01;
  Small s{generate(sc).series, {}};
  s.opt.train_days = 3;
  s.opt.holdout_days = 1;
  s.opt.window = 3;
  s.opt.hidden_size = 4;
  s.opt.epochs = 2;
  s.opt.batch_size = 32;
  s.opt.seed = 9;
  return s;
}

EvalReport fake(ModelKind kind, bool adjusted, double holdout) {
  EvalReport r;
  r.kind = kind;
  r.adjusted = adjusted;
  r.fold_mapes = {1.0, 2.0, 3.0, 4.0, 5.0};
  r.holdout_mape = holdout;
  r.seed = 42;
  return r;
}

}  // namespace

TEST_CASE("mape examples") {
  const std::vector<double> a{1, 2, 4};
  CHECK(mape(a, a) == 0.0);
  CHECK(mape(a, std::vector<double>{2, 4, 8}) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(std::abs(mape(a, std::vector<double>{1.1, 1.8, 4.4}) - 10.0) < 1e-12);
  CHECK_THROWS_AS(mape(std::vector<double>{1, 0}, std::vector<double>{1, 1}), Error);
  CHECK_THROWS_AS(mape(a, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(mape(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("mape is scale invariant") {
  const std::vector<double> a{3.2, 9.1, 4.4, 7.0, 11.5};
  const std::vector<double> p{3.0, 9.9, 4.1, 7.7, 10.0};
  const double base = mape(a, p);
  for (double c : {0.001, 2.0, 1e6}) {
    std::vector<double> ca(a.size()), cp(p.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      ca[i] = c * a[i];
      cp[i] = c * p[i];
    }
    CHECK(mape(ca, cp) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("improvement percentages") {
  CHECK(improvement_pct(7.51, 5.28) == doctest::Approx(29.6937).epsilon(1e-5));
  CHECK(improvement_pct(7.51, 5.28) > 29.0);
  CHECK(improvement_pct(3.94, 3.51) == doctest::Approx(10.9137).epsilon(1e-5));
  CHECK(improvement_pct(4.2, 4.2) == 0.0);
  CHECK_THROWS_AS(improvement_pct(0.0, 1.0), Error);
}

TEST_CASE("rolling splits enumerate the formula") {
  const auto plan = rolling_splits(12, 5);
  CHECK(plan.test_size == 2);
  REQUIRE(plan.folds.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(plan.folds[i].train == IndexRange{0, 2 * (i + 1)});
    CHECK(plan.folds[i].test == IndexRange{2 * (i + 1), 2 * (i + 2)});
  }
  const auto six = rolling_splits(6, 5);
  CHECK(six.test_size == 1);
  CHECK(six.folds.size() == 5);
  CHECK(six.folds.front().train == IndexRange{0, 1});
  CHECK_THROWS_AS(rolling_splits(5, 5), Error);
  CHECK_THROWS_AS(rolling_splits(10, 0), Error);
}

TEST_CASE("rolling split properties") {
  for (std::size_t n : {6u, 7u, 13u, 100u, 1001u, 6045u}) {
    for (std::size_t k : {1u, 2u, 5u}) {
      if (n < k + 1) continue;
      const auto plan = rolling_splits(n, k);
      CAPTURE(n);
      CAPTURE(k);
      REQUIRE(plan.folds.size() == k);
      // First train block plus the test blocks tile [0, n) once.
      std::vector<int> cover(n, 0);
      for (std::size_t i = plan.folds[0].train.begin; i < plan.folds[0].train.end; ++i) ++cover[i];
      for (const Fold& f : plan.folds) {
        CHECK(f.train.begin == 0);
        CHECK(f.test.begin == f.train.end);
        CHECK(f.test.size() == plan.test_size);
        for (std::size_t i = f.test.begin; i < f.test.end; ++i) ++cover[i];
      }
      CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }));
      for (std::size_t i = 0; i + 1 < k; ++i) {
        CHECK(plan.folds[i + 1].train.end == plan.folds[i].test.end);
        CHECK(plan.folds[i + 1].train.end > plan.folds[i].train.end);
      }
      CHECK(plan.folds[0].train.size() == n - k * (n / (k + 1)));
    }
  }
}

TEST_CASE("seed policy") {
  CHECK(detection_seed(10) != 10);
  CHECK(model_seed(10, ModelKind::rnn) != model_seed(10, ModelKind::lstm));
  CHECK(model_seed(10, ModelKind::gru) == model_seed(10, ModelKind::gru));
}

TEST_CASE("render_report") {
  SUBCASE("empty input") { CHECK_THROWS_AS(render_report({}), Error); }
  SUBCASE("single report gives one row") {
    const std::vector<EvalReport> one{fake(ModelKind::gru, false, 6.41)};
    const auto r = render_report(one);
    CHECK(r.csv ==
          "model,detection,adjusted,fold1,fold2,fold3,fold4,fold5,holdout_mape,"
          "improvement_pct,seed\n"
          "gru,three-sigma,false,1.000000,2.000000,3.000000,4.000000,5.000000,6.410000,,42\n");
    CHECK(std::count(r.text.begin(), r.text.end(), '\n') == 3);
    CHECK(r.text.find("GRU") != std::string::npos);
  }
  SUBCASE("five kinds with both variants give five rows") {
    const double raw[] = {7.51, 5.03, 6.41, 3.94, 3.95};
    const double adj[] = {5.28, 3.80, 5.28, 3.51, 3.55};
    std::vector<EvalReport> all;
    for (std::size_t i = 0; i < 5; ++i) {
      all.push_back(fake(neuralseq::kAllModelKinds[i], false, raw[i]));
      all.push_back(fake(neuralseq::kAllModelKinds[i], true, adj[i]));
      all.back().improvement_pct = improvement_pct(raw[i], adj[i]);
    }
    const auto r = render_report(all);
    CHECK(std::count(r.csv.begin(), r.csv.end(), '\n') == 11);
    CHECK(std::count(r.text.begin(), r.text.end(), '\n') == 7);
    CHECK(r.text.find("MAPE (with outlier)") != std::string::npos);
    CHECK(r.text.find("MAPE (without outlier)") != std::string::npos);
    CHECK(r.text.find("29.69%") != std::string::npos);
    CHECK(r.text.find("LSTM En_De_Atn") != std::string::npos);

    const auto back = parse_report_csv(r.csv);
    REQUIRE(back.size() == 10);
    CHECK(back[0].kind == ModelKind::rnn);
    CHECK(back[1].adjusted);
    CHECK(back[1].holdout_mape == 5.28);
    CHECK(back[1].improvement_pct.has_value());
    CHECK(!back[0].improvement_pct.has_value());
    CHECK(render_report(back).csv == r.csv);
  }
  SUBCASE("mismatched fold counts") {
    auto a = fake(ModelKind::rnn, false, 1.0);
    auto b = fake(ModelKind::rnn, true, 1.0);
    b.fold_mapes.pop_back();
    const std::vector<EvalReport> two{a, b};
    CHECK_THROWS_AS(render_report(two), Error);
  }
}

TEST_CASE("prepare and training values") {
  auto s = small_setup();
  const auto data = prepare(s.series, s.opt);
  CHECK(data.train.size() == 3 * 288);
  CHECK(data.holdout.size() == 288);
  CHECK(data.window == 3);

  std::size_t flagged = 0;
  const auto raw = training_values(data, false, s.opt);
  const auto adj = training_values(data, true, s.opt, &flagged);
  CHECK(raw == data.train.values());
  CHECK(flagged > 0);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) changed += raw[i] != adj[i] ? 1 : 0;
  CHECK(changed <= flagged);
  CHECK(changed > 0);

  s.opt.window.reset();
  const auto automatic = prepare(s.series, s.opt);
  CHECK(automatic.window >= 1);
  CHECK(automatic.window <= s.opt.max_window);
}

TEST_CASE("holdout values never influence training-side fits") {
  auto s = small_setup();
  ExperimentOptions opt = s.opt;
  const auto data = prepare(s.series, opt);

  // Same series with every holdout value scaled up and shifted.
  std::vector<double> mutated = s.series.values();
  for (std::size_t i = data.train.size(); i < mutated.size(); ++i) mutated[i] = 3.0 * mutated[i] + 50;
  const auto data2 = prepare(s.series.with_values(mutated), opt);
  CHECK(data2.train.values() == data.train.values());
  CHECK(training_values(data2, true, opt) == training_values(data, true, opt));
  CHECK(three_sigma_mask(data2.train.values()).flags() ==
        three_sigma_mask(data.train.values()).flags());

  opt.window.reset();
  CHECK(prepare(s.series.with_values(mutated), opt).window == prepare(s.series, opt).window);

  const auto a = evaluate_model(data, ModelKind::rnn, true, s.opt);
  const auto b = evaluate_model(data2, ModelKind::rnn, true, s.opt);
  CHECK(a.fold_mapes == b.fold_mapes);
  CHECK(a.holdout_mape != b.holdout_mape);
}

TEST_CASE("an empty mask makes the adjusted run identical to the raw run") {
  auto s = small_setup();
  s.opt.sigma_k = 1000.0;
  const auto data = prepare(s.series, s.opt);
  std::size_t flagged = 1;
  training_values(data, true, s.opt, &flagged);
  REQUIRE(flagged == 0);
  for (ModelKind kind : {ModelKind::rnn, ModelKind::lstm_en_de_atn}) {
    const auto raw = evaluate_model(data, kind, false, s.opt);
    const auto adj = evaluate_model(data, kind, true, s.opt);
    CHECK(raw.fold_mapes == adj.fold_mapes);
    CHECK(raw.holdout_mape == adj.holdout_mape);
    CHECK(raw.trace_predicted == adj.trace_predicted);
  }
}

TEST_CASE("evaluate_model report contents") {
  auto s = small_setup();
  const auto data = prepare(s.series, s.opt);
  const auto r = evaluate_model(data, ModelKind::gru, false, s.opt);
  CHECK(r.fold_mapes.size() == 5);
  for (double m : r.fold_mapes) CHECK(m >= 0.0);
  CHECK(r.holdout_mape >= 0.0);
  CHECK(r.trace_actual.size() == data.holdout.size() - data.window);
  CHECK(r.trace_predicted.size() == r.trace_actual.size());
  CHECK(r.trace_timestamps.front() == data.holdout[data.window].timestamp);
  CHECK(r.seed == s.opt.seed);
  CHECK(r.config.seed == model_seed(s.opt.seed, ModelKind::gru));
  CHECK(r.config.window_w == 3);
  CHECK(r.config.epochs == 2);
  const auto trace = trace_csv(r);
  CHECK(trace.rfind("timestamp,actual_gbps,predicted_gbps\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') ==
        static_cast<std::ptrdiff_t>(r.trace_actual.size() + 1));
}

TEST_CASE("comparison runs are reproducible and parallel-safe") {
  auto s = small_setup();
  const std::vector<ModelKind> kinds{ModelKind::rnn, ModelKind::gru};
  const auto a = run_comparison(s.series, kinds, s.opt);
  REQUIRE(a.size() == 4);
  CHECK(!a[0].adjusted);
  CHECK(a[1].adjusted);
  CHECK(a[1].improvement_pct.has_value());
  CHECK(!a[0].improvement_pct.has_value());
  s.opt.jobs = 3;
  const auto b = run_comparison(s.series, kinds, s.opt);
  CHECK(render_report(a).csv == render_report(b).csv);
  CHECK(render_report(a).text == render_report(b).text);
}
