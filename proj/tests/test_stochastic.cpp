#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/random.hpp"
#include "dephmix/stochastic.hpp"
#include "dephmix/triangle.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <map>

using namespace dephmix;

namespace {

double bloch_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const BlochVector u = to_bloch(a), v = to_bloch(b);
  return std::sqrt((u.b1 - v.b1) * (u.b1 - v.b1) + (u.b2 - v.b2) * (u.b2 - v.b2) +
                   (u.b3 - v.b3) * (u.b3 - v.b3));
}

}  // namespace

TEST_CASE("direction sampling: discrete axes") {
  RngStream rng(1);
  const DirectionSampler sampler(DirectionSpec::axes(MixtureWeights(1, 0, 0)));
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d n = sampler(rng);
    CHECK(std::abs(std::abs(n[0]) - 1.0) < 1e-15);
    CHECK(n[1] == 0.0);
    CHECK(n[2] == 0.0);
  }

  // second moments converge to the weights
  const MixtureWeights x(0.2, 0.5, 0.3);
  const DirectionSampler s2(DirectionSpec::axes(x));
  Eigen::Vector3d m2 = Eigen::Vector3d::Zero();
  const int n_samp = 200000;
  for (int i = 0; i < n_samp; ++i) {
    const Eigen::Vector3d n = s2(rng);
    m2 += n.cwiseProduct(n);
  }
  m2 /= n_samp;
  for (int k = 0; k < 3; ++k) {
    const double sigma = std::sqrt(x[k] * (1 - x[k]) / n_samp);
    CHECK(std::abs(m2[k] - x[k]) < 3.0 * sigma + 1e-12);
  }
}

TEST_CASE("direction sampling: uniform sphere moments") {
  RngStream rng(2);
  const DirectionSampler sampler(DirectionSpec::sphere());
  Eigen::Vector3d m2 = Eigen::Vector3d::Zero();
  const int n_samp = 1000000;
  for (int i = 0; i < n_samp; ++i) {
    const Eigen::Vector3d n = sampler(rng);
    CHECK(std::abs(n.norm() - 1.0) < 1e-12);
    m2 += n.cwiseProduct(n);
  }
  m2 /= n_samp;
  const double sigma = std::sqrt((0.2 - 1.0 / 9.0) / n_samp);  // Var(n_k^2) = 4/45
  for (int k = 0; k < 3; ++k) CHECK(std::abs(m2[k] - 1.0 / 3.0) < 3.0 * sigma);
}

TEST_CASE("direction sampling: calibrated anisotropic gaussian") {
  SECTION("planar case keeps the zero component exactly") {
    RngStream rng(3);
    const DirectionSampler sampler(DirectionSpec::gaussian(MixtureWeights(0.5, 0.5, 0.0)));
    Eigen::Vector3d m2 = Eigen::Vector3d::Zero();
    const int n_samp = 200000;
    for (int i = 0; i < n_samp; ++i) {
      const Eigen::Vector3d n = sampler(rng);
      CHECK(n[2] == 0.0);
      m2 += n.cwiseProduct(n);
    }
    m2 /= n_samp;
    const double sigma = std::sqrt(0.25 / n_samp) * 2.0;
    CHECK(std::abs(m2[0] - 0.5) < 3.0 * sigma);
    CHECK(std::abs(m2[1] - 0.5) < 3.0 * sigma);
  }

  SECTION("generic weights: quadrature check of the calibration") {
    const MixtureWeights x(0.5, 0.3, 0.2);
    const DirectionSampler sampler(DirectionSpec::gaussian(x));
    const auto m = detail::normalized_gaussian_moments(sampler.calibrated_variances());
    CHECK(std::abs(m[0] - x.x1) < 1e-10);
    CHECK(std::abs(m[1] - x.x2) < 1e-10);
    CHECK(std::abs(m[2] - x.x3) < 1e-10);
  }

  SECTION("generic weights: sampled moments") {
    RngStream rng(4);
    const MixtureWeights x(0.6, 0.25, 0.15);
    const DirectionSampler sampler(DirectionSpec::gaussian(x));
    Eigen::Vector3d m2 = Eigen::Vector3d::Zero();
    const int n_samp = 400000;
    for (int i = 0; i < n_samp; ++i) {
      const Eigen::Vector3d n = sampler(rng);
      m2 += n.cwiseProduct(n);
    }
    m2 /= n_samp;
    for (int k = 0; k < 3; ++k) CHECK(std::abs(m2[k] - x[k]) < 3.0 * std::sqrt(0.25 / n_samp));
  }
}

TEST_CASE("random-unitary evolution: fixed axis coherence decay") {
  const DensityMatrix plus = from_bloch(BlochVector(1, 0, 0));
  const RuEstimate est = ru_evolve(plus, 1.0, DirectionSpec::axes(MixtureWeights(0, 0, 1)),
                                   100000, 99);
  const double expect = std::exp(-2.0);  // Bloch b1 component
  const BlochVector b = to_bloch(est.state);
  CHECK(std::abs(b.b1 - expect) < 3.0 * est.bloch_se[0]);
  CHECK(std::abs(est.state.mat()(0, 1).real() - 0.5 * expect) < 1.5 * est.bloch_se[0]);
}

TEST_CASE("random-unitary evolution: maximally mixed state is exact") {
  const DensityMatrix mixed = from_bloch(BlochVector(0, 0, 0));
  const RuEstimate est = ru_evolve(mixed, 2.0, DirectionSpec::sphere(), 100, 5);
  CHECK(est.se < 1e-15);
  CHECK(trace_distance(est.state, mixed) < 1e-15);
}

TEST_CASE("random-unitary evolution matches the analytic mixture") {
  const MixtureWeights x(0.5, 0.5, 0.0);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.4, 0.2, 0.7));
  const double t = 2.0;
  const RuEstimate est = ru_evolve(rho0, t, DirectionSpec::axes(x), 100000, 123);
  const DensityMatrix expect = apply_pauli_channel(channel_probs(x, t), rho0);
  CHECK(bloch_distance(est.state, expect) < 3.0 * est.se);

  // empirical channel probabilities are unbiased too
  const auto pexp = channel_probs(x, t);
  for (int j = 0; j < 4; ++j)
    CHECK(std::abs(est.probs[j] - pexp[j]) < 3.0 * est.probs_se[j] + 1e-12);
}

TEST_CASE("pathwise mode agrees with exact phase sampling") {
  const MixtureWeights x(1.0 / 3, 1.0 / 3, 1.0 / 3);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.8, 0.0, 0.4));
  const double t = 1.0;
  const std::size_t n = 30000;
  const RuEstimate exact = ru_evolve(rho0, t, DirectionSpec::axes(x), n, 7, RuMode::exact_phase);
  const RuEstimate path =
      ru_evolve(rho0, t, DirectionSpec::axes(x), n, 8, RuMode::pathwise, 1e-3);
  const double sigma = std::sqrt(exact.se * exact.se + path.se * path.se);
  CHECK(bloch_distance(exact.state, path.state) < 3.0 * sigma);
}

TEST_CASE("random-unitary evolution input validation") {
  const DensityMatrix rho0 = from_bloch(BlochVector(0, 0, 0));
  CHECK_THROWS_AS(ru_evolve(rho0, 1.0, DirectionSpec::sphere(), 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ru_evolve(rho0, -1.0, DirectionSpec::sphere(), 10, 1), std::invalid_argument);
}

TEST_CASE("gillespie: deterministic alternation at a vertex") {
  RngStream rng(11);
  const auto events = gillespie(MixtureWeights(1, 0, 0), 200.0, rng);
  REQUIRE(!events.empty());
  int state = 0;
  for (const auto& e : events) {
    CHECK(e.from_state == state);
    CHECK(e.to_state == (state == 0 ? 1 : 0));
    state = e.to_state;
  }
}

TEST_CASE("gillespie: long-run occupation of the ground label") {
  RngStream rng(12);
  const MixtureWeights x(0.4, 0.35, 0.25);
  const double t_end = 200000.0;
  const auto events = gillespie(x, t_end, rng);
  double in_zero = 0.0, last = 0.0;
  int state = 0;
  for (const auto& e : events) {
    if (state == 0) in_zero += e.time - last;
    last = e.time;
    state = e.to_state;
  }
  if (state == 0) in_zero += t_end - last;
  // stationary probability of the aggregated chain (state 0 vs any k) is 1/2
  CHECK(std::abs(in_zero / t_end - 0.5) < 0.01);
}

TEST_CASE("gillespie: empirical generator matches the rate matrix") {
  RngStream rng(13);
  const MixtureWeights x(0.5, 0.3, 0.2);
  std::array<double, 4> time_in{};
  std::array<std::map<int, int>, 4> transitions;
  const int runs = 2000;
  const double t_end = 20.0;
  for (int r = 0; r < runs; ++r) {
    RngStream sub = RngStream::substream(13, r);
    const auto events = gillespie(x, t_end, sub);
    double last = 0.0;
    int state = 0;
    for (const auto& e : events) {
      time_in[state] += e.time - last;
      transitions[e.from_state][e.to_state]++;
      last = e.time;
      state = e.to_state;
    }
    time_in[state] += t_end - last;
  }
  // rate 0->k is x_k, rate k->0 is 1; Poisson counts n give SE sqrt(n)
  for (int k = 1; k <= 3; ++k) {
    const double n0k = transitions[0][k];
    const double rate0k = n0k / time_in[0];
    CHECK(std::abs(rate0k - x[k - 1]) < 3.0 * std::sqrt(n0k) / time_in[0]);
    const double nk0 = transitions[k][0];
    const double ratek0 = nk0 / time_in[k];
    CHECK(std::abs(ratek0 - 1.0) < 3.0 * std::sqrt(nk0) / time_in[k]);
    // no k -> j transitions between excited labels
    for (int j = 1; j <= 3; ++j) CHECK(transitions[k].count(j) == 0);
  }
  CHECK_THROWS_AS(gillespie(x, 0.0, rng), std::invalid_argument);
}

TEST_CASE("jump ensemble occupation matches the classical solution") {
  const MixtureWeights x(0.5, 0.5, 0.0);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.3, 0.3, 0.8));
  const TimeGrid grid(0.0, 2.0, 4);
  const std::size_t runs = 100000;
  const TrajectoryRecord rec = jump_ensemble(x, rho0, grid, runs, 77);

  for (int m = 0; m < grid.size(); ++m) {
    const auto expect = channel_probs(x, grid.time(m));
    for (int j = 0; j < 4; ++j) {
      const double se = std::sqrt(expect[j] * (1 - expect[j]) / runs);
      CHECK(std::abs(rec.probs[m][j] - expect[j]) <= 3.0 * se + 1e-12);
    }
    const DensityMatrix state = apply_pauli_channel(expect, rho0);
    CHECK(trace_distance(rec.states[m], state) < 3.0 * std::sqrt(3.0 / runs));
  }
}

TEST_CASE("jump ensemble: maximally mixed state is constant") {
  const DensityMatrix mixed = from_bloch(BlochVector(0, 0, 0));
  const TrajectoryRecord rec =
      jump_ensemble(MixtureWeights(0.2, 0.3, 0.5), mixed, TimeGrid(0, 3, 6), 200, 5);
  for (const auto& s : rec.states) CHECK(trace_distance(s, mixed) < 1e-14);
}

TEST_CASE("jump ensemble: stationary mixture at late times") {
  const double third = 1.0 / 3.0;
  const MixtureWeights x(third, third, third);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.9, 0, 0));
  const TimeGrid grid(0.0, 8.0, 2);
  const std::size_t runs = 100000;
  const TrajectoryRecord rec = jump_ensemble(x, rho0, grid, runs, 31);
  // p -> (1/2, 1/6, 1/6, 1/6): average = rho0/2 + sum_k sigma_k rho0 sigma_k / 6
  ComplexMatrix expect = 0.5 * rho0.mat();
  for (int k = 1; k <= 3; ++k) expect += pauli(k) * rho0.mat() * pauli(k) / 6.0;
  CHECK(trace_distance(rec.states.back(), DensityMatrix(expect)) < 3.0 * std::sqrt(3.0 / runs));
}

TEST_CASE("extended jump states") {
  SECTION("pure input") {
    const ExtendedJumpStates ext = extended_jump_states(from_bloch(BlochVector(0, 0, 1)));
    CHECK(ext.valid);
    CHECK(ext.ortho_residual <= 1e-12);
    CHECK(ext.ptrace_residual <= 1e-10);
  }
  SECTION("maximally mixed input: orthogonal vectors, identical marginals") {
    const ExtendedJumpStates ext = extended_jump_states(from_bloch(BlochVector(0, 0, 0)));
    CHECK(ext.valid);
    for (int k = 0; k < 4; ++k) {
      const ComplexMatrix proj = ext.vectors[k] * ext.vectors[k].adjoint();
      const ComplexMatrix red = partial_trace_matrix(proj, {2, 8}, {0});
      CHECK((red - 0.5 * pauli(0)).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
  SECTION("random inputs") {
    RngStream rng(21);
    for (int i = 0; i < 100; ++i) {
      const double z = 2.0 * rng.uniform() - 1.0;
      const double phi = 2.0 * M_PI * rng.uniform();
      const double r = std::cbrt(rng.uniform());
      const double s = std::sqrt(1.0 - z * z);
      const ExtendedJumpStates ext = extended_jump_states(
          from_bloch(BlochVector(r * s * std::cos(phi), r * s * std::sin(phi), r * z)));
      CHECK(ext.valid);
    }
  }
}

TEST_CASE("extended jump ensemble equals the plain ensemble run for run") {
  // same master seed drives identical classical trajectories through both
  // realisations, so the averaged reduced states coincide to round-off
  const MixtureWeights x(0.5, 0.5, 0.0);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.6, -0.2, 0.5));
  const TimeGrid grid(0.0, 1.5, 3);
  const std::size_t runs = 2000;
  const TrajectoryRecord plain = jump_ensemble(x, rho0, grid, runs, 404);
  const TrajectoryRecord ext = extended_jump_ensemble(x, rho0, grid, runs, 404);
  for (int m = 0; m < grid.size(); ++m)
    CHECK(trace_distance(plain.states[m], ext.states[m]) < 1e-12);
}

TEST_CASE("extended jump ensemble matches the analytic dynamics") {
  const MixtureWeights x(0.6, 0.3, 0.1);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.5, 0.4, -0.3));
  const TimeGrid grid(0.0, 1.0, 2);
  const std::size_t runs = 50000;
  const TrajectoryRecord rec = extended_jump_ensemble(x, rho0, grid, runs, 15);
  for (int m = 0; m < grid.size(); ++m) {
    const DensityMatrix expect =
        apply_pauli_channel(channel_probs(x, grid.time(m)), rho0);
    CHECK(trace_distance(rec.states[m], expect) < 3.0 * std::sqrt(3.0 / runs));
  }
}

TEST_CASE("distribution independence: equal second moments, equal dynamics") {
  const double third = 1.0 / 3.0;
  const DensityMatrix rho0 = from_bloch(BlochVector(0.7, 0.1, 0.5));
  const double t = 1.0;
  const std::size_t n = 100000;
  const RuEstimate axes =
      ru_evolve(rho0, t, DirectionSpec::axes(MixtureWeights(third, third, third)), n, 1);
  const RuEstimate sphere = ru_evolve(rho0, t, DirectionSpec::sphere(), n, 2);
  const double sigma = std::sqrt(axes.se * axes.se + sphere.se * sphere.se);
  CHECK(bloch_distance(axes.state, sphere.state) < 3.0 * sigma);
}

TEST_CASE("reproducibility: identical seeds give identical results") {
  RngStream a(9001), b(9001);
  const MixtureWeights x(0.3, 0.3, 0.4);
  const auto e1 = gillespie(x, 50.0, a);
  const auto e2 = gillespie(x, 50.0, b);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < e1.size(); ++i) {
    CHECK(e1[i].time == e2[i].time);  // bit-identical
    CHECK(e1[i].to_state == e2[i].to_state);
  }

  const DensityMatrix rho0 = from_bloch(BlochVector(0.4, 0.4, 0.4));
  const RuEstimate r1 = ru_evolve(rho0, 1.0, DirectionSpec::sphere(), 5000, 31337);
  const RuEstimate r2 = ru_evolve(rho0, 1.0, DirectionSpec::sphere(), 5000, 31337);
  CHECK((r1.state.mat() - r2.state.mat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r1.se == r2.se);
}
