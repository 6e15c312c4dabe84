#include <doctest.h>

#include <cmath>
#include <random>

#include "ppe/conditioning.hpp"
#include "ppe/dispersion.hpp"
#include "ppe/errors.hpp"
#include "ppe/nonlinear.hpp"
#include "ppe/perturbation.hpp"
#include "ppe/resample.hpp"
#include "ppe/simulator.hpp"
#include "ppe/solver.hpp"
#include "ppe/source.hpp"
#include "ppe/theoretical_profile.hpp"

using namespace ppe;

namespace {

LinkSpec span_link(double length_km, double beta2 = -21.6, double launch_dbm = 2.0) {
  return LinkSpec({SpanSpec::from_conventional(length_km, 0.2, beta2, 0.0, 1.3, launch_dbm)}, {}, dbm_to_watts(launch_dbm));
}

ComplexField qam_source(std::size_t n_symbols, std::uint64_t seed, double rate = 128e9) {
  SourceSpec spec;
  spec.seed = seed;
  spec.symbol_rate_hz = rate;
  return generate_source(spec, n_symbols, 2).field;
}

Eigen::VectorXd true_gamma(const LinkSpec& link, const EstimationGrid& grid) {
  const auto th = theoretical_profile(link, grid.z_m);
  return Eigen::Map<const Eigen::VectorXd>(th.gamma_prime.data(), static_cast<Eigen::Index>(th.gamma_prime.size()));
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_SUITE("ppe_estimator") {

TEST_CASE("G columns match a direct composition of CD and Kerr operators") {
  const auto link = span_link(2.0);
  const auto tx = qam_source(2048, 1);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  REQUIRE(grid.size() == 4);
  GBuildOptions opts;
  opts.nl_oversampling = 1;
  const auto g = build_g(Field(tx), link, grid, opts);
  const double length = link.total_length_m();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double z = grid.z_m[k];
    const auto at_z = apply_cd(tx, CdOperator::along(link, 0.0, z));
    const auto back = apply_cd(nl_operator_single(at_z), CdOperator::along(link, z, length));
    const auto col = g.column(k);
    REQUIRE(static_cast<std::size_t>(col.size()) == back.size());
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < back.size(); ++n) {
      const cplx expected = cplx(0.0, -grid.dz_m) * back.data()[n];
      num += std::norm(col[static_cast<Eigen::Index>(n)] - expected);
      den += std::norm(expected);
    }
    CHECK(std::sqrt(num / den) < 1e-12);
  }
}

TEST_CASE("first column without preceding CD") {
  const auto link = span_link(1.0);
  const auto tx = qam_source(1024, 2);
  GBuildOptions opts;
  opts.nl_oversampling = 1;
  const auto g = build_g(Field(tx), link, EstimationGrid::uniform(link, 500.0), opts);
  const auto expected = apply_cd(nl_operator_single(tx), CdOperator::along(link, 0.0, 1e3));
  for (std::size_t n = 0; n < expected.size(); n += 101)
    CHECK(std::abs(g.column(0)[static_cast<Eigen::Index>(n)] - cplx(0.0, -500.0) * expected.data()[n]) < 1e-9);
}

TEST_CASE("no dispersion anywhere makes every column parallel") {
  const auto link = span_link(2.0, 0.0);
  SourceSpec spec;
  spec.format = Modulation::qpsk;
  spec.rolloff = 0.0;
  // symbol-spaced constant-modulus samples
  std::mt19937_64 rng(3);
  Samples s(512);
  for (auto& v : s) v = std::polar(1.0, kPi / 2.0 * static_cast<double>(rng() % 4) + kPi / 4.0);
  const ComplexField tx(s, 1.0 / 64e9);
  GBuildOptions opts;
  opts.nl_oversampling = 1;
  const auto g = build_g(Field(tx), link, EstimationGrid::uniform(link, 500.0), opts);
  // (|a|^2 - 2) a = -a: each column is +j dz tx
  for (std::size_t n = 0; n < s.size(); n += 37) CHECK(std::abs(g.column(2)[static_cast<Eigen::Index>(n)] - cplx(0.0, 500.0) * s[n]) < 1e-12);
  const double cg = condition_number(g);
  CHECK((std::isinf(cg) || cg > 1e12));
  PerturbationSystem sys(g.grid(), false);
  sys.accumulate(g, g.apply(Eigen::VectorXd::Ones(4)));
  CHECK_THROWS_AS(solve_ls(sys), SingularSystemError);
}

TEST_CASE("accumulate: zero frame, hand-computed 2x2 normal matrix, linearity") {
  const auto link = span_link(1.0);
  const auto tx = qam_source(512, 4);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  const Eigen::MatrixXcd gc = g.complex_matrix();

  PerturbationSystem empty(grid, false);
  PerturbationSystem zero(grid, false);
  zero.accumulate(g, Eigen::VectorXcd::Zero(gc.rows()));
  CHECK(zero.rhs().norm() == 0.0);

  PerturbationSystem one(grid, false);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd a1(gc.rows());
  for (Eigen::Index n = 0; n < a1.size(); ++n) a1[n] = cplx(nd(rng), nd(rng));
  one.accumulate(g, a1);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cplx acc{};
      for (Eigen::Index n = 0; n < gc.rows(); ++n) acc += std::conj(gc(n, i)) * gc(n, j);
      CHECK(one.normal_matrix()(i, j) == doctest::Approx(acc.real()).epsilon(1e-12));
    }
    cplx r{};
    for (Eigen::Index n = 0; n < gc.rows(); ++n) r += std::conj(gc(n, i)) * a1[n];
    CHECK(one.rhs()[i] == doctest::Approx(r.real()).epsilon(1e-12));
  }

  PerturbationSystem two(grid, false);
  two.accumulate(g, a1);
  two.accumulate(g, a1);
  CHECK((two.normal_matrix() - 2.0 * one.normal_matrix()).norm() == 0.0);
  CHECK((two.rhs() - 2.0 * one.rhs()).norm() == 0.0);
  CHECK(two.frames() == 2);
  (void)empty;
}

TEST_CASE("streamed accumulation equals the materialized one") {
  const auto link = span_link(3.0);
  const auto tx = qam_source(1024, 6);
  const auto grid = EstimationGrid::uniform(link, 250.0);
  GBuildOptions opts;
  opts.guard_samples = 16;
  const auto g = build_g(Field(tx), link, grid, opts);
  const Eigen::VectorXcd a1 = g.apply(true_gamma(link, grid));
  PerturbationSystem dense(grid, false), streamed(grid, false);
  dense.accumulate(g, a1);
  streamed.accumulate_streamed(Field(tx), link, opts, a1, 5);
  CHECK((dense.normal_matrix() - streamed.normal_matrix()).norm() < 1e-12 * dense.normal_matrix().norm());
  CHECK((dense.rhs() - streamed.rhs()).norm() < 1e-12 * dense.rhs().norm());
}

TEST_CASE("LS recovers a synthetic profile exactly, zero A1 gives zero") {
  const auto link = span_link(20.0);
  const auto tx = qam_source(4096, 7);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  const Eigen::VectorXd truth = true_gamma(link, grid);
  PerturbationSystem sys(grid, false);
  sys.accumulate(g, g.apply(truth));
  const auto est = solve_ls(sys);
  const Eigen::VectorXd got = Eigen::Map<const Eigen::VectorXd>(est.gamma_prime.data(), truth.size());
  CHECK(rel(got, truth) < 1e-9);
  CHECK(est.stable);
  CHECK(est.cond_g == doctest::Approx(std::sqrt(est.normal_condition)));
  for (std::size_t k = 0; k < est.power_dbm.size(); ++k)
    CHECK(est.power_dbm[k] == doctest::Approx(watts_to_dbm(truth[static_cast<Eigen::Index>(k)] / 1.3e-3)).epsilon(1e-6));

  PerturbationSystem zero(grid, false);
  zero.accumulate(g, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(g.complex_rows())));
  for (double v : solve_ls(zero).gamma_prime) CHECK(v == 0.0);
  for (double v : solve_cm(zero).gamma_prime) CHECK(v == 0.0);
}

TEST_CASE("LS equals the inverse normal matrix applied to CM") {
  const auto link = span_link(10.0);
  const auto tx = qam_source(2048, 8);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd a1 = g.apply(true_gamma(link, grid));
  for (Eigen::Index n = 0; n < a1.size(); ++n) a1[n] += 1e-3 * cplx(nd(rng), nd(rng));
  PerturbationSystem sys(grid, false);
  sys.accumulate(g, a1);
  const auto ls = solve_ls(sys);
  const auto cm = solve_cm(sys);
  CHECK(cm.arbitrary_units);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(ls.gamma_prime.data(), sys.rhs().size());
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(cm.gamma_prime.data(), sys.rhs().size());
  CHECK(rel(sys.normal_matrix() * x, c) < 1e-9);
}

TEST_CASE("ridge and singular detection") {
  const auto link = span_link(20.0);
  const auto tx = qam_source(4096, 10);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  PerturbationSystem sys(grid, false);
  sys.accumulate(g, g.apply(true_gamma(link, grid)));
  SolveOptions tight;
  tight.singular_threshold = 1.0;  // everything counts as singular
  CHECK_THROWS_AS(solve_ls(sys, tight), SingularSystemError);
  SolveOptions ridge;
  ridge.ridge = 1e-3 * sys.normal_matrix().diagonal().mean();
  const auto biased = solve_ls(sys, ridge);
  const auto plain = solve_ls(sys);
  double diff = 0.0;
  for (std::size_t k = 0; k < plain.gamma_prime.size(); ++k) diff += std::abs(biased.gamma_prime[k] - plain.gamma_prime[k]);
  CHECK(diff > 0.0);
}

TEST_CASE("augmented LS absorbs a common rotation and scaling") {
  const auto link = span_link(10.0);
  const auto tx = qam_source(2048, 11);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  const Eigen::VectorXd truth = true_gamma(link, grid);
  const auto a1 = form_a1(Field(apply_cd(tx, CdOperator::along(link, 0.0, link.total_length_m()))), Field(tx), link,
                          {Alignment::none, 0});
  const Eigen::VectorXcd rx = a1.a0 + g.apply(truth);

  PerturbationSystem plain_sys(grid, false);
  plain_sys.accumulate(g, rx - a1.a0);
  const auto plain = solve_ls(plain_sys);

  auto run = [&](cplx c) {
    AugmentedSystem sys(grid, false);
    sys.accumulate(g, a1.a0, c * rx);
    return solve_ls_augmented(sys);
  };
  const auto same = run(1.0);
  for (std::size_t k = 0; k < truth.size(); ++k)
    CHECK(same.profile.gamma_prime[k] == doctest::Approx(plain.gamma_prime[k]).epsilon(1e-6));
  const auto rotated = run(std::polar(1.0, 0.3));
  CHECK(std::arg(rotated.scale) == doctest::Approx(0.3).epsilon(1e-9));
  const auto scaled = run(1.01);
  CHECK(std::abs(scaled.scale) == doctest::Approx(1.01).epsilon(1e-9));
  for (std::size_t k = 0; k < truth.size(); ++k) {
    CHECK(rotated.profile.gamma_prime[k] == doctest::Approx(truth[static_cast<Eigen::Index>(k)]).epsilon(1e-6));
    CHECK(scaled.profile.gamma_prime[k] == doctest::Approx(truth[static_cast<Eigen::Index>(k)]).epsilon(1e-6));
  }
}

TEST_CASE("form_a1: dispersion-only rx leaves nothing, synthetic perturbation comes back") {
  const auto link = span_link(5.0);
  const auto tx = qam_source(1024, 12);
  const auto rx = apply_cd(tx, CdOperator::along(link, 0.0, link.total_length_m()));
  const auto r = form_a1(Field(rx), Field(tx), link);
  CHECK(r.a1.norm() < 1e-12 * r.a0.norm());

  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  const Eigen::VectorXcd pert = g.apply(true_gamma(link, grid));
  Samples noisy(rx.data());
  for (std::size_t n = 0; n < noisy.size(); ++n) noisy[n] += pert[static_cast<Eigen::Index>(n)];
  const auto r2 = form_a1(Field(ComplexField(noisy, rx.sample_period())), Field(tx), link, {Alignment::none, 0});
  CHECK((r2.a1 - pert).norm() < 1e-12 * pert.norm());
}

TEST_CASE("A1 energy grows quadratically with launch power") {
  std::vector<double> lp, le;
  const auto tx = qam_source(2048, 13, 64e9);
  SourceSpec spec;
  spec.seed = 13;
  spec.symbol_rate_hz = 64e9;
  const auto tx4 = generate_source(spec, 2048, 4).field;
  for (double dbm : {-6.0, -3.0, 0.0}) {
    const auto link = span_link(40.0, -21.6, dbm);
    SimConfig cfg;
    cfg.sps = 4;
    cfg.step_m = 100.0;
    const auto rx = decimate(std::get<ComplexField>(propagate(tx4, link, cfg).rx), 2);
    const auto r = form_a1(Field(rx), Field(tx), link, {Alignment::none, 0});
    lp.push_back(std::log10(dbm_to_watts(dbm)));
    le.push_back(std::log10(r.a1.squaredNorm() / r.a0.squaredNorm()));
  }
  const double slope = (le[2] - le[0]) / (lp[2] - lp[0]);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("average_profiles") {
  ProfileEstimate p;
  p.dz_m = 500.0;
  p.z_m = {0.0, 500.0, 1000.0};
  p.gamma_per_w_m = {1.3e-3, 1.3e-3, 1.3e-3};
  p.gamma_prime = {1e-6, 2e-6, -1e-6};
  p.frames = 1;
  p.seeds = {1};
  derive_power(p);
  const std::vector<ProfileEstimate> single{p};
  const auto one = average_profiles(single);
  CHECK(one.gamma_prime == p.gamma_prime);

  ProfileEstimate m = p;
  for (auto& v : m.gamma_prime) v = -v;
  m.seeds = {2};
  const std::vector<ProfileEstimate> pair{p, m};
  const auto avg = average_profiles(pair);
  for (double v : avg.gamma_prime) CHECK(v == 0.0);
  CHECK(avg.profiles_averaged == 2);
  CHECK(avg.seeds.size() == 2);
  CHECK(avg.gamma_prime_std[1] == doctest::Approx(std::sqrt(2.0) * 2e-6));

  ProfileEstimate other = p;
  other.dz_m = 250.0;
  const std::vector<ProfileEstimate> bad{p, other};
  CHECK_THROWS(average_profiles(bad));
}

TEST_CASE("averaging shrinks the spread like 1/sqrt(n)") {
  // noisy synthetic frames sharing one G
  const auto link = span_link(10.0);
  const auto tx = qam_source(1024, 14);
  const auto grid = EstimationGrid::uniform(link, 500.0);
  const auto g = build_g(Field(tx), link, grid);
  const Eigen::VectorXcd clean = g.apply(true_gamma(link, grid));
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd(0.0, 0.05 * clean.norm() / std::sqrt(static_cast<double>(clean.size())));
  auto group_mean = [&](std::size_t n) {
    std::vector<ProfileEstimate> frames;
    for (std::size_t f = 0; f < n; ++f) {
      Eigen::VectorXcd a1 = clean;
      for (Eigen::Index i = 0; i < a1.size(); ++i) a1[i] += cplx(nd(rng), nd(rng));
      PerturbationSystem sys(grid, false);
      sys.accumulate(g, a1);
      frames.push_back(solve_ls(sys));
    }
    return average_profiles(frames).gamma_prime;
  };
  // spread of the averaged profile over repeated groups
  auto spread = [&](std::size_t n) {
    const std::size_t reps = 40;
    std::vector<std::vector<double>> means;
    for (std::size_t r = 0; r < reps; ++r) means.push_back(group_mean(n));
    double s = 0.0;
    for (std::size_t k = 0; k < means[0].size(); ++k) {
      double mu = 0.0;
      for (const auto& m : means) mu += m[k] / reps;
      for (const auto& m : means) s += (m[k] - mu) * (m[k] - mu);
    }
    return std::sqrt(s);
  };
  const double ratio = spread(10) / spread(50);
  CHECK(ratio == doctest::Approx(std::sqrt(5.0)).epsilon(0.2));
}

TEST_CASE("dual-pol power uses the 9/8 Manakov factor") {
  ProfileEstimate p;
  p.dual_pol = true;
  p.dz_m = 500.0;
  p.z_m = {0.0};
  p.gamma_per_w_m = {1.3e-3};
  p.gamma_prime = {8.0 / 9.0 * 1.3e-3 * 1e-3};
  derive_power(p);
  CHECK(p.power_dbm[0] == doctest::Approx(0.0).epsilon(1e-9));
  derive_power(p, false);
  CHECK(p.power_dbm[0] == doctest::Approx(linear_to_db(8.0 / 9.0)).epsilon(1e-9));
}

TEST_CASE("cost gradient matches finite differences") {
  const auto link = span_link(2.0);
  const auto tx = qam_source(512, 16);
  const auto grid = EstimationGrid::uniform(link, 250.0);
  const auto g = build_g(Field(tx), link, grid);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd a1(static_cast<Eigen::Index>(g.complex_rows()));
  for (Eigen::Index n = 0; n < a1.size(); ++n) a1[n] = cplx(nd(rng), nd(rng)) * 1e-3;
  PerturbationSystem sys(grid, false);
  sys.accumulate(g, a1);
  Eigen::VectorXd x(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = 1e-6 * nd(rng);
  const auto direct = [&](const Eigen::VectorXd& v) { return (a1 - g.apply(v)).squaredNorm(); };
  CHECK(sys.cost(x) == doctest::Approx(direct(x)).epsilon(1e-9));
  const Eigen::VectorXd grad = sys.gradient(x);
  Eigen::VectorXd fd(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-7;
    Eigen::VectorXd p = x, m = x;
    p[k] += h;
    m[k] -= h;
    fd[k] = (direct(p) - direct(m)) / (2.0 * h);
  }
  CHECK(rel(grad, fd) < 1e-6);
}

}  // TEST_SUITE
