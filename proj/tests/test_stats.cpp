#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>

#include "styloshift/stats.hpp"

using namespace styloshift;

namespace {

// Two documents per sign so the per-document values are symmetric around
// the intended mean and the instability samples have a known spread.
std::vector<ShiftSample> exact_case() {
  // dims = 2. delta_v means: d0 = 3, d1 = 4. Shared SE(I) = {1, 1}
  // will be injected, so b = (3, 4) and B = 5 exactly.
  std::vector<ShiftSample> s(4);
  s[0] = {"a", "g", {2.0, 3.0}, {0.0, 0.0}};
  s[1] = {"b", "g", {4.0, 5.0}, {1.0, 1.0}};
  s[2] = {"c", "g", {2.0, 3.0}, {0.0, 0.0}};
  s[3] = {"d", "g", {4.0, 5.0}, {1.0, 1.0}};
  return s;
}

}  // namespace

TEST_CASE("shift subtracts per dimension and checks the model id") {
  DimensionScores a{"m", "c1", {1.0, 2.0, 3.0}};
  DimensionScores b{"m", "c2", {0.5, 2.0, -1.0}};
  auto d = shift(a, b);
  REQUIRE(d.size() == 3);
  CHECK(d[0] == Catch::Approx(0.5));
  CHECK(d[1] == Catch::Approx(0.0));
  CHECK(d[2] == Catch::Approx(4.0));
  DimensionScores other{"other", "c3", {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(shift(a, other), ModelMismatch);
  DimensionScores short_v{"m", "c4", {1.0}};
  CHECK_THROWS_AS(shift(a, short_v), ModelMismatch);
}

TEST_CASE("normalized shift equations: 3-4-5 case is exact") {
  auto shifts = exact_case();
  BenchmarkParams p;
  p.iters = 200;
  p.seed = {7};
  std::vector<double> shared{1.0, 1.0};
  BenchmarkResult r = benchmark("cfg", shifts, p, &shared);
  REQUIRE(r.mean_delta.size() == 2);
  CHECK(std::abs(r.mean_delta[0] - 3.0) < 1e-12);
  CHECK(std::abs(r.mean_delta[1] - 4.0) < 1e-12);
  CHECK(std::abs(r.b[0] - 3.0) < 1e-12);
  CHECK(std::abs(r.b[1] - 4.0) < 1e-12);
  CHECK(std::abs(r.B - 5.0) < 1e-12);
  CHECK(r.n_docs == 4);
  // point estimates always lie inside their intervals
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(r.b_ci_low[d] <= r.b[d]);
    CHECK(r.b_ci_high[d] >= r.b[d]);
  }
  CHECK(r.B_ci_low <= r.B);
  CHECK(r.B_ci_high >= r.B);
}

TEST_CASE("bootstrap SE recovers the analytic standard error") {
  // 100 samples from N(0, 2): SE of the mean is 2/sqrt(100) = 0.2.
  // The estimate should land within 10% for the vast majority of seeds.
  auto start = std::chrono::steady_clock::now();
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    detail::Prng gen(detail::substream(seed, 0xabcd, 0));
    std::vector<double> xs(100);
    double m = 0.0;
    for (double& x : xs) {
      x = 2.0 * gen.normal();
      m += x;
    }
    m /= 100.0;
    for (double& x : xs) x -= m;  // exact sample mean 0, sd ~= 2
    double sd = 0.0;
    for (double x : xs) sd += x * x;
    sd = std::sqrt(sd / 99.0);
    double analytic = sd / 10.0;
    double est = bootstrap_se(xs, 2000, RngSeed{seed});
    if (std::abs(est - analytic) < 0.1 * analytic) ++ok;
  }
  CHECK(ok >= 95);
  auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::steady_clock::now() - start);
  CHECK(elapsed.count() < 10);
}

TEST_CASE("bootstrap SE is deterministic in the seed") {
  std::vector<double> xs{1.0, 2.5, -0.5, 4.0, 0.25, 3.5};
  double a = bootstrap_se(xs, 500, RngSeed{42});
  double b = bootstrap_se(xs, 500, RngSeed{42});
  double c = bootstrap_se(xs, 500, RngSeed{43});
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("bootstrap SE input validation") {
  CHECK_THROWS_AS(bootstrap_se({1.0}, 100, RngSeed{1}), TooFewSamples);
  CHECK_THROWS_AS(bootstrap_se({1.0, 2.0}, 0, RngSeed{1}), TooFewSamples);
  // identical samples: zero spread, zero SE
  CHECK(bootstrap_se({3.0, 3.0, 3.0}, 100, RngSeed{1}) == 0.0);
}

TEST_CASE("p-value semantics: floor, cap, and zero mean") {
  // no crossings at all: floored at 1/iters
  std::vector<double> all_pos(400, 1.0);
  CHECK(bootstrap_p_value(2.0, all_pos) == Catch::Approx(1.0 / 400.0));
  // half the draws cross: doubled fraction capped at 1
  std::vector<double> half(400, 1.0);
  for (std::size_t i = 0; i < 200; ++i) half[i] = -1.0;
  CHECK(bootstrap_p_value(2.0, half) == Catch::Approx(1.0));
  // observed mean exactly zero is never significant
  CHECK(bootstrap_p_value(0.0, all_pos) == Catch::Approx(1.0));
  // one crossing in 400, doubled
  std::vector<double> one(400, 1.0);
  one[7] = -0.5;
  CHECK(bootstrap_p_value(2.0, one) == Catch::Approx(2.0 / 400.0));
}

TEST_CASE("Bonferroni threshold with m_tests = 198") {
  // 0.05 / 198 ~= 2.525e-4. A p of 2e-4 passes, 3e-4 does not.
  std::vector<double> draws(10000, 1.0);
  draws[0] = -1.0;  // p = 2/10000 = 2e-4
  CHECK(significance(1.0, draws, 198));
  draws[1] = -1.0;  // p = 4e-4
  CHECK_FALSE(significance(1.0, draws, 198));
  CHECK(significance(1.0, draws, 1));
}

TEST_CASE("benchmark respects m_tests when flagging dimensions") {
  auto shifts = exact_case();
  BenchmarkParams p;
  p.iters = 400;
  p.seed = {11};
  std::vector<double> shared{1.0, 1.0};
  p.m_tests = 1;
  BenchmarkResult loose = benchmark("cfg", shifts, p, &shared);
  // all delta_v are strictly positive, so no resampled mean crosses zero
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(loose.p_value[d] == Catch::Approx(1.0 / 400.0));
    CHECK(loose.significant[d]);
  }
  p.m_tests = 198;  // 0.05/198 ~= 2.5e-4 < 1/400 = 2.5e-3
  BenchmarkResult strict = benchmark("cfg", shifts, p, &shared);
  for (std::size_t d = 0; d < 2; ++d) CHECK_FALSE(strict.significant[d]);
}

TEST_CASE("benchmark is deterministic and seed-sensitive") {
  auto shifts = exact_case();
  // give the instability samples some spread so the inner SE varies
  shifts[0].i = {0.2, -0.3};
  shifts[1].i = {1.4, 0.9};
  shifts[2].i = {-0.6, 0.4};
  shifts[3].i = {0.8, -1.1};
  BenchmarkParams p;
  p.iters = 300;
  p.inner_iters = 50;
  p.seed = {99};
  BenchmarkResult a = benchmark("cfg", shifts, p);
  BenchmarkResult b = benchmark("cfg", shifts, p);
  CHECK(a.B == b.B);
  CHECK(a.b_ci_low == b.b_ci_low);
  CHECK(a.b_ci_high == b.b_ci_high);
  CHECK(a.p_value == b.p_value);
  p.seed = {100};
  BenchmarkResult c = benchmark("cfg", shifts, p);
  bool any_differs = a.B_ci_low != c.B_ci_low || a.B_ci_high != c.B_ci_high ||
                     a.b_ci_low != c.b_ci_low || a.b_ci_high != c.b_ci_high ||
                     a.se_i != c.se_i;
  CHECK(any_differs);
  // the mean shift itself does not depend on the seed (only the
  // bootstrap-estimated SE and intervals do)
  CHECK(a.mean_delta == c.mean_delta);
}

TEST_CASE("zero baseline spread marks the dimension non-normalizable") {
  std::vector<ShiftSample> shifts(3);
  shifts[0] = {"a", "g", {1.0, 2.0}, {0.5, 0.0}};
  shifts[1] = {"b", "g", {2.0, 2.0}, {1.5, 0.0}};
  shifts[2] = {"c", "g", {3.0, 2.0}, {1.0, 0.0}};
  BenchmarkParams p;
  p.iters = 200;
  p.seed = {5};
  BenchmarkResult r = benchmark("cfg", shifts, p);
  CHECK(r.normalizable[0]);
  CHECK_FALSE(r.normalizable[1]);  // SE(I) == 0 on dim 1
  CHECK(r.b[1] == 0.0);
  // B only aggregates normalizable dimensions
  CHECK(r.B == Catch::Approx(std::abs(r.b[0])));
}

TEST_CASE("benchmark and baseline reject fewer than two documents") {
  std::vector<ShiftSample> one(1);
  one[0] = {"a", "g", {1.0}, {1.0}};
  BenchmarkParams p;
  p.seed = {1};
  CHECK_THROWS_AS(benchmark("cfg", one, p), TooFewSamples);
  CHECK_THROWS_AS(baseline_se(one, 100, RngSeed{1}), TooFewSamples);
  CHECK_THROWS_AS(human_baseline(one, p), TooFewSamples);
  std::vector<ShiftSample> ragged(2);
  ragged[0] = {"a", "g", {1.0, 2.0}, {1.0, 2.0}};
  ragged[1] = {"b", "g", {1.0}, {1.0}};
  CHECK_THROWS_AS(benchmark("cfg", ragged, p), ModelMismatch);
  std::vector<double> wrong_se{1.0, 2.0, 3.0};
  std::vector<ShiftSample> two(2);
  two[0] = {"a", "g", {1.0, 2.0}, {0.5, 0.5}};
  two[1] = {"b", "g", {2.0, 1.0}, {1.5, 1.5}};
  CHECK_THROWS_AS(benchmark("cfg", two, p, &wrong_se), ModelMismatch);
}

TEST_CASE("shared baseline SE equals the standalone computation") {
  auto shifts = exact_case();
  shifts[0].i = {0.2, -0.3};
  shifts[1].i = {1.4, 0.9};
  shifts[2].i = {-0.6, 0.4};
  shifts[3].i = {0.8, -1.1};
  BenchmarkParams p;
  p.iters = 300;
  p.seed = {21};
  std::vector<double> se = baseline_se(shifts, p.iters, p.seed);
  BenchmarkResult without = benchmark("cfg", shifts, p);
  BenchmarkResult with = benchmark("cfg", shifts, p, &se);
  CHECK(without.se_i == with.se_i);
  CHECK(without.b == with.b);
  CHECK(without.B == with.B);
}

TEST_CASE("human baseline reports drift of the human halves") {
  std::vector<ShiftSample> samples(4);
  samples[0] = {"a", "g", {0.0}, {1.0}};
  samples[1] = {"b", "g", {0.0}, {2.0}};
  samples[2] = {"c", "g", {0.0}, {3.0}};
  samples[3] = {"d", "g", {0.0}, {2.0}};
  BenchmarkParams p;
  p.iters = 400;
  p.seed = {3};
  HumanBaseline hb = human_baseline(samples, p);
  CHECK(hb.n_docs == 4);
  CHECK(hb.mean_i[0] == Catch::Approx(2.0));
  CHECK(hb.se_i[0] > 0.0);
  CHECK(hb.ci_low[0] <= hb.mean_i[0]);
  CHECK(hb.ci_high[0] >= hb.mean_i[0]);
  // all i strictly positive, mean never crosses zero
  CHECK(hb.p_value[0] == Catch::Approx(1.0 / 400.0));
}

TEST_CASE("results TSV has one row per dimension plus the B row") {
  auto shifts = exact_case();
  BenchmarkParams p;
  p.iters = 100;
  p.seed = {1};
  std::vector<double> shared{1.0, 1.0};
  BenchmarkResult r = benchmark("cfg", shifts, p, &shared);
  std::string tsv = results_to_tsv({r}, {"dim1", "dim2"});
  auto lines = split_lines(tsv);
  REQUIRE(lines.size() >= 4);
  CHECK(lines[0].find("config_id\tdim_id") == 0);
  CHECK(lines[1].find("cfg\tdim1\t") == 0);
  CHECK(lines[2].find("cfg\tdim2\t") == 0);
  CHECK(lines[3].find("cfg\tB\t") == 0);
  CHECK(lines[3].find(format_real(5.0)) != std::string::npos);
}

TEST_CASE("result JSON round trip preserves every field") {
  auto shifts = exact_case();
  shifts[1].i = {0.3, 0.7};
  BenchmarkParams p;
  p.iters = 150;
  p.inner_iters = 40;
  p.seed = {17};
  p.m_tests = 12;
  BenchmarkResult r = benchmark("cfg", shifts, p);
  BenchmarkResult back =
      result_from_json(result_to_json(r, {"dim1", "dim2"}));
  CHECK(back.config_id == r.config_id);
  CHECK(back.n_docs == r.n_docs);
  CHECK(back.B == r.B);
  CHECK(back.B_ci_low == r.B_ci_low);
  CHECK(back.B_ci_high == r.B_ci_high);
  CHECK(back.mean_delta == r.mean_delta);
  CHECK(back.se_i == r.se_i);
  CHECK(back.b == r.b);
  CHECK(back.b_ci_low == r.b_ci_low);
  CHECK(back.b_ci_high == r.b_ci_high);
  CHECK(back.p_value == r.p_value);
  CHECK(back.significant == r.significant);
  CHECK(back.normalizable == r.normalizable);
}
