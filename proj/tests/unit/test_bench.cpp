#include <gtest/gtest.h>

#include <sstream>

#include "symqoc/bench.hpp"

using namespace symqoc;

TEST(TimeRepeated, StatsAreOrderedAndScaled) {
  int calls = 0;
  const auto t = time_repeated([&] { ++calls; }, 6, 2.0, true);
  EXPECT_EQ(calls, 7);
  EXPECT_EQ(t.reps, 6);
  EXPECT_LE(t.min_ns, t.median_ns);
  EXPECT_LE(t.min_ns, t.mean_ns);
  EXPECT_GE(t.min_ns, 0.0);
}

TEST(TimeRepeated, Guards) {
  EXPECT_THROW(time_repeated([] {}, kMinBenchReps - 1), ValidationError);
  EXPECT_THROW(time_repeated([] {}, kMinBenchReps, 0.0), ValidationError);
}

TEST(BenchQoc, BackendsAgreeAndRecordsAreLabelled) {
  QocWorkload w;
  w.steps = 20;
  w.iterations = 2;
  const auto recs = bench_qoc_iteration({3}, {Backend::full, Backend::first_block_d, Backend::first_block_s}, w);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].label, "qoc:full");
  EXPECT_EQ(recs[1].label, "qoc:first-block-d");
  EXPECT_EQ(recs[2].label, "qoc:first-block-s");
  for (const auto& r : recs) EXPECT_GT(r.stats.median_ns, 0.0);
  EXPECT_GT(speedup(recs, 3, "qoc:full", "qoc:first-block-d"), 0.0);
  EXPECT_THROW(find_record(recs, 4, "qoc:full"), ValidationError);
}

TEST(BenchQoc, ProblemNeverStopsEarly) {
  const auto p = bench_problem(QocWorkload{}, 4, Backend::full);
  EXPECT_EQ(p.optimizer.target, 1.0);
  EXPECT_EQ(p.optimizer.stall_tolerance, 0.0);
  EXPECT_EQ(p.optimizer.max_iterations, 3);
}

TEST(BenchTrotter, ExactFullStepMatchesStepper) {
  ModelConfig m = make_model(ModelFamily::nearest, 3);
  m.control = ControlMode::per_qubit;
  const auto ops = realize_model(m);
  const PulseSchedule s = benchmark_controls(3, m.bz, 3, 0.05);
  const ExactStepper stepper(m);
  DenseMatrix a = DenseMatrix::Identity(8, 8), b = a;
  for (int j = 0; j < 3; ++j) {
    exact_full_step(ops, s, j, a);
    stepper.apply(s, j, b);
  }
  EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(BenchTrotter, RecordsAndCsv) {
  TrotterWorkload w;
  w.steps = 4;
  const auto recs = bench_trotter_step({3}, w);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_DOUBLE_EQ(find_record(recs, 3, "trotter-parallel-approx").stats.median_ns,
                   find_record(recs, 3, "trotter-serial").stats.median_ns / 3.0);
  std::ostringstream os;
  write_bench_csv(os, recs);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "n,backend,median_ns,mean_ns,min_ns,reps");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
