#include "altmax/harness.hpp"

#include <doctest.h>

#include <atomic>
#include <sstream>
#include <stdexcept>

using namespace altmax;
using namespace altmax::harness;

namespace {

ExperimentConfig toy_config(const std::string& extra = "") {
  ExperimentConfig c = ExperimentConfig::from_kv(KeyValueConfig::parse("reps = 60\n" + extra), Family::Toy);
  c.finalize();
  return c;
}

ExperimentConfig small_single_index() {
  ExperimentConfig c = ExperimentConfig::from_kv(
      KeyValueConfig::parse("reps = 6\nn = 200\nm = 4\ngrid_N = 16\ncov_reps = 40\ntrace_steps = 4\n"),
      Family::SingleIndex);
  c.finalize();
  return c;
}

bool same_records(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.records.size() != b.records.size()) return false;
  for (size_t i = 0; i < a.records.size(); ++i) {
    const auto &x = a.records[i], &y = b.records[i];
    if (x.seed != y.seed || x.ok != y.ok || x.fisher != y.fisher || x.wilks != y.wilks ||
        x.me_dist != y.me_dist || x.xi_sq != y.xi_sq)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("parallel_for visits every index and propagates exceptions") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 8, [&](int i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(50, 4, [](int i) {
                    if (i == 17) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("toy experiment is independent of the thread count") {
  ExperimentConfig c1 = toy_config();
  ExperimentConfig c8 = c1;
  c8.threads = 8;
  const auto a = run_wilks_fisher(c1), b = run_wilks_fisher(c8);
  CHECK(same_records(a, b));
  CHECK(a.summary == b.summary);
  CHECK(a.summary.at("ok") == 60);
  CHECK(a.summary.at("monotone_violations") == 0);
  CHECK(a.K == 2);
  CHECK(a.nu == doctest::Approx(0.25));
}

TEST_CASE("single-index experiment is independent of the thread count") {
  ExperimentConfig c1 = small_single_index();
  ExperimentConfig c4 = c1;
  c4.threads = 4;
  const auto a = run_wilks_fisher(c1), b = run_wilks_fisher(c4);
  CHECK(same_records(a, b));
  CHECK(a.summary == b.summary);
  CHECK(a.q == 1);
}

TEST_CASE("aggregates are reproducible from the records") {
  const auto rep = run_wilks_fisher(toy_config());
  CHECK(compute_aggregates(rep) == rep.summary);

  // Toy records: the Fisher residual follows the exact linear recursion, so
  // the excess over the limit contracts at nu per step.
  for (const auto& r : rep.records) {
    REQUIRE(r.ok);
    for (size_t k = 1; k < 8; ++k)
      if (r.fisher_excess[k - 1] > 1e-9)
        CHECK(r.fisher_excess[k] == doctest::Approx(0.25 * r.fisher_excess[k - 1]).epsilon(1e-6));
    CHECK(r.fisher_limit <= 1e-9);
  }
}

TEST_CASE("failed replications are counted and excluded") {
  auto rep = run_wilks_fisher(toy_config("reps = 10\n"));
  rep.records[3].ok = false;
  rep.records[3].error = "synthetic";
  rep.records[3].fisher.clear();
  rep.records[3].wilks.clear();
  rep.records[3].me_dist.clear();
  rep.records[3].fisher_excess.clear();
  const auto s = compute_aggregates(rep);
  CHECK(s.at("failed") == 1);
  CHECK(s.at("ok") == 9);
  CHECK(std::isfinite(s.at("wilks_mean")));
}

TEST_CASE("observed contraction rate") {
  std::vector<double> d;
  for (int k = 0; k < 12; ++k) d.push_back(std::pow(0.5, k));
  const auto fit = observed_rate(d, 1e-8);
  CHECK(fit.method == 0);
  CHECK(fit.rate == doctest::Approx(0.5).epsilon(1e-10));

  const auto ratio = observed_rate({1.0, 1e-3, 1e-10, 0.0}, 1e-8);
  CHECK(ratio.method == 1);
  CHECK(ratio.rate == doctest::Approx(1e-3));

  const auto floor = observed_rate({1e-9, 0.0, 0.0}, 1e-8);
  CHECK(floor.method == 2);
  CHECK(floor.rate == 0.0);
}

TEST_CASE("condition probe on the toy model") {
  ExperimentConfig c = toy_config("probe_r = 0.5, 2\nprobe_reps = 4\nprobe_points = 10\n");
  const auto probes = probe_delta(c);
  REQUIRE(probes.size() == 2);
  for (const auto& p : probes) CHECK(p.delta <= 1e-6);
}

TEST_CASE("sweep cells are reproducible") {
  ExperimentConfig c = small_single_index();
  c.reps = 3;
  c.sweep_n = {150, 300};
  c.sweep_m = {3};
  const auto a = run_dimension_sweep(c);
  c.threads = 3;
  const auto b = run_dimension_sweep(c);
  REQUIRE(a.cells.size() == 2);
  for (size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].n == b.cells[i].n);
    CHECK(a.cells[i].p_star == 1 + 3);  // chart dimension plus m
    CHECK(a.cells[i].wilks_error_median == b.cells[i].wilks_error_median);
    CHECK(a.cells[i].fisher_median == b.cells[i].fisher_median);
  }
  std::ostringstream os;
  write_sweep_csv(os, a);
  CHECK(os.str().find("n,m") == 0);
}

TEST_CASE("bound report for the toy context") {
  const Context ctx = make_context(toy_config());
  CHECK(ctx.bounds_ok);
  CHECK(ctx.q == 1);
  CHECK(ctx.K == ctx.bound_report.K_stop);
  CHECK(ctx.K_rec >= ctx.K);
  std::ostringstream os;
  write_bound_report(os, ctx.bound_report);
  CHECK(os.str().find("z_x") != std::string::npos);
}

TEST_CASE("toy ME convergence follows the exact recursion") {
  const auto rep = run_me_convergence(toy_config("reps = 40\ntrace_steps = 20\n"));
  CHECK(rep.summary.at("me_rate_method") == 0);
  CHECK(std::abs(rep.summary.at("me_rate") - rep.nu) <= 1e-6);
}

TEST_CASE("single-index condition probe scales like 1/sqrt(n)") {
  auto probe = [](int n) {
    ExperimentConfig c = ExperimentConfig::from_kv(
        KeyValueConfig::parse("n = " + std::to_string(n) +
                              "\nm = 4\ncov_reps = 40\nprobe_r = 0.5, 1, 2\nprobe_reps = 10\nprobe_points = 10\n"),
        Family::SingleIndex);
    c.finalize();
    return probe_delta(c);
  };
  const auto a = probe(500), b = probe(2000);
  REQUIRE(a.size() == 3);
  for (const auto* set : {&a, &b})
    for (size_t i = 1; i < set->size(); ++i)
      CHECK((*set)[i].delta >= (*set)[i - 1].delta - 2 * ((*set)[i].se + (*set)[i - 1].se));
  for (size_t i = 0; i < a.size(); ++i) {
    const double ra = a[i].delta * std::sqrt(500.0), rb = b[i].delta * std::sqrt(2000.0);
    INFO("r = " << a[i].r << " delta sqrt(n): " << ra << " vs " << rb);
    CHECK(ra / rb <= 2.0);
    CHECK(rb / ra <= 2.0);
  }
}
