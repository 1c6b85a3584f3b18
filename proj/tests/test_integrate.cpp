#include "dephmix/analytic.hpp"
#include "dephmix/core.hpp"
#include "dephmix/integrate.hpp"
#include "dephmix/random.hpp"
#include "dephmix/triangle.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>

using namespace dephmix;

namespace {

double max_multiplier_error(const std::vector<std::array<double, 3>>& lams,
                            const MixtureWeights& x, const TimeGrid& grid) {
  double err = 0.0;
  for (int m = 0; m < grid.size(); ++m) {
    const LambdaTriple l = lambdas(x, grid.time(m));
    for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(lams[m][k] - l[k]));
  }
  return err;
}

}  // namespace

TEST_CASE("time-local solver reproduces the always-negative-rate dynamics") {
  const DensityMatrix plus = from_bloch(BlochVector(1, 0, 0));
  const TimeGrid grid(0.0, 2.0, 2000);
  const TrajectoryRecord rec = solve_time_local([](double t) { return enm_rates(t); }, plus, grid);

  const MixtureWeights x(0.5, 0.5, 0.0);
  for (int m = 0; m < grid.size(); ++m) {
    const DensityMatrix expect = apply_pauli_channel(channel_probs(x, grid.time(m)), plus);
    CHECK(trace_distance(rec.states[m], expect) < 1e-8);
  }
}

TEST_CASE("time-local solver: zero rates freeze the state") {
  RateDiagnostics zero;
  const DensityMatrix rho0 = from_bloch(BlochVector(0.2, -0.4, 0.5));
  const TrajectoryRecord rec =
      solve_time_local([zero](double) { return zero; }, rho0, TimeGrid(0.0, 3.0, 100));
  for (const auto& s : rec.states) CHECK(trace_distance(s, rho0) < 1e-14);
}

TEST_CASE("time-local solver: constant (2,0,0) semigroup") {
  RateDiagnostics r;
  r.gamma1 = 2.0;
  r.gamma0 = 2.0;
  const DensityMatrix rho0 = from_bloch(BlochVector(0.3, 0.4, 0.5));
  const TimeGrid grid(0.0, 2.0, 2000);
  const TrajectoryRecord rec = solve_time_local([r](double) { return r; }, rho0, grid);
  for (int m = 0; m < grid.size(); ++m) {
    const double e = std::exp(-2.0 * grid.time(m));
    const BlochVector b = to_bloch(rec.states[m]);
    CHECK(std::abs(b.b1 - 0.3) < 1e-10);        // along the dephasing axis
    CHECK(std::abs(b.b2 - 0.4 * e) < 1e-10);    // transverse decays as e^{-2t}
    CHECK(std::abs(b.b3 - 0.5 * e) < 1e-10);
  }
}

TEST_CASE("time-local solver matches analytic multipliers for random mixtures") {
  RngStream rng(21);
  for (int i = 0; i < 10; ++i) {
    const MixtureWeights x = uniform_simplex_point(rng);
    const TimeGrid grid(0.0, 5.0, 5000);
    const auto lams = solve_time_local_multipliers(mixture_rate_fn(x), grid);
    CHECK(max_multiplier_error(lams, x, grid) < 1e-8);
  }
}

TEST_CASE("time-local solver rejects non-finite rates") {
  RateDiagnostics bad;
  bad.gamma1 = std::numeric_limits<double>::quiet_NaN();
  const DensityMatrix rho0 = from_bloch(BlochVector(0, 0, 0));
  CHECK_THROWS_AS(solve_time_local([bad](double) { return bad; }, rho0, TimeGrid(0, 1, 10)),
                  std::invalid_argument);
}

TEST_CASE("volterra: purely local kernel matches the semigroup") {
  const KernelComponents k = kernel_components(MixtureWeights(1, 0, 0),
                                               KernelConvention::rederived);
  const DensityMatrix rho0 = from_bloch(BlochVector(0.2, 0.5, -0.3));
  const TimeGrid grid(0.0, 3.0, 6000);
  const TrajectoryRecord rec = solve_volterra(k, rho0, grid);
  for (int m = 0; m < grid.size(); ++m) {
    const DensityMatrix expect = dephasing_solution(rho0, {1, 0, 0}, grid.time(m));
    CHECK(trace_distance(rec.states[m], expect) < 1e-8);
  }
}

TEST_CASE("volterra with the rederived kernel matches the analytic map") {
  for (const MixtureWeights& x :
       {MixtureWeights(0.5, 0.5, 0.0), MixtureWeights(0.6, 0.3, 0.1)}) {
    const TimeGrid grid(0.0, 5.0, 5000);  // h = 1e-3
    const auto lams =
        solve_volterra_multipliers(kernel_components(x, KernelConvention::rederived), grid);
    CHECK(max_multiplier_error(lams, x, grid) < 1e-6);
  }
}

TEST_CASE("volterra converges at second order") {
  const MixtureWeights x(0.4, 0.35, 0.25);
  const KernelComponents k = kernel_components(x, KernelConvention::rederived);
  const double e1 = max_multiplier_error(solve_volterra_multipliers(k, TimeGrid(0, 2, 500)), x,
                                         TimeGrid(0, 2, 500));
  const double e2 = max_multiplier_error(solve_volterra_multipliers(k, TimeGrid(0, 2, 1000)), x,
                                         TimeGrid(0, 2, 1000));
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("volterra with the printed kernel solves the half-rate dynamics") {
  // The printed components damp coherences by e^{-t}: the solution equals the
  // mixture multipliers at half time, i.e. x + (1-x) e^{-t}.
  const MixtureWeights x(0.5, 0.5, 0.0);
  const TimeGrid grid(0.0, 2.0, 2000);
  const auto lams =
      solve_volterra_multipliers(kernel_components(x, KernelConvention::paper), grid);
  double err_half_rate = 0.0, mismatch = 0.0;
  const std::array<double, 3> xs = {x.x1, x.x2, x.x3};
  for (int m = 0; m < grid.size(); ++m) {
    const double t = grid.time(m);
    for (int k = 0; k < 3; ++k) {
      err_half_rate =
          std::max(err_half_rate, std::abs(lams[m][k] - (xs[k] + (1 - xs[k]) * std::exp(-t))));
      mismatch = std::max(mismatch, std::abs(lams[m][k] - lambdas(x, t)[k]));
    }
  }
  CHECK(err_half_rate < 1e-6);
  CHECK(mismatch > 0.1);  // the convention difference is macroscopic
}

TEST_CASE("classical markov exact solution") {
  RngStream rng(31);
  for (int i = 0; i < 20; ++i) {
    const MixtureWeights x = uniform_simplex_point(rng);
    const double t = 6.0 * rng.uniform();
    const auto p = solve_classical_markov(x, {1, 0, 0, 0}, t);
    const auto expect = channel_probs(x, t);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(p[j] - expect[j]) < 1e-12);
  }

  // stationary vector p* = (1/2, x1/2, x2/2, x3/2) is a null vector
  const MixtureWeights x(0.3, 0.45, 0.25);
  const Eigen::Vector4d pstar(0.5, 0.5 * x.x1, 0.5 * x.x2, 0.5 * x.x3);
  CHECK((classical_generator(x) * pstar).cwiseAbs().maxCoeff() < 1e-15);
  const auto kept = solve_classical_markov(x, {0.5, 0.15, 0.225, 0.125}, 3.0);
  CHECK(std::abs(kept[0] - 0.5) < 1e-12);
  CHECK(std::abs(kept[1] - 0.15) < 1e-12);

  const auto t0 = solve_classical_markov(x, {0.2, 0.3, 0.4, 0.1}, 0.0);
  CHECK(t0[0] == Catch::Approx(0.2).margin(1e-14));
  CHECK(t0[3] == Catch::Approx(0.1).margin(1e-14));

  // probabilities stay on the simplex
  for (double t : {0.1, 1.0, 4.0}) {
    const auto p = solve_classical_markov(x, {0.2, 0.3, 0.4, 0.1}, t);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= -1e-13);
      sum += v;
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("classical propagator") {
  const RateFn enm = [](double t) { return enm_rates(t); };

  SECTION("identity at t = 0") {
    const Eigen::Matrix4d t0 = classical_propagator(enm, 0.0);
    CHECK((t0 - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("negative-rate special case from (1,0,0,0)") {
    for (double t : {0.2, 0.7, 1.5, 4.0}) {
      const Eigen::Vector4d p = classical_propagator(enm, t) * Eigen::Vector4d(1, 0, 0, 0);
      const double e = std::exp(-2.0 * t);
      CHECK(std::abs(p[0] - 0.5 * (1 + e)) < 1e-10);
      CHECK(std::abs(p[1] - 0.25 * (1 - e)) < 1e-10);
      CHECK(std::abs(p[2] - 0.25 * (1 - e)) < 1e-10);
      CHECK(std::abs(p[3]) < 1e-10);
      for (int j = 0; j < 4; ++j) CHECK(p[j] >= -1e-12);  // proper distribution
    }
  }

  SECTION("columns sum to one") {
    RngStream rng(41);
    const MixtureWeights x = uniform_simplex_point(rng);
    const Eigen::Matrix4d tp = classical_propagator(mixture_rate_fn(x), 2.3);
    for (int c = 0; c < 4; ++c) CHECK(tp.col(c).sum() == Catch::Approx(1.0).margin(1e-10));
  }

  SECTION("Hadamard eigenvalues equal the Bloch multipliers") {
    RngStream rng(42);
    Eigen::Matrix4d h;
    h << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
    for (int i = 0; i < 10; ++i) {
      const MixtureWeights x = uniform_simplex_point(rng);
      const double t = 5.0 * rng.uniform();
      const Eigen::Matrix4d diag = 0.25 * h * classical_propagator(mixture_rate_fn(x), t) * h;
      const LambdaTriple l = lambdas(x, t);
      CHECK(std::abs(diag(0, 0) - 1.0) < 1e-9);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(diag(k + 1, k + 1) - l[k]) < 1e-9);
      // off-diagonal part vanishes
      Eigen::Matrix4d off = diag;
      off.diagonal().setZero();
      CHECK(off.cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("simplified three-state chain matches the four-state solution") {
  // With weights (1/2, 1/2, 0) state 3 is never entered; dropping it from the
  // classical generator leaves a three-state semigroup whose solution is the
  // four-state solution with the last entry removed.
  const MixtureWeights x(0.5, 0.5, 0.0);
  const Eigen::Matrix4d a4 = classical_generator(x);
  Eigen::Matrix3d a3;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a3(i, j) = a4(i, j);

  for (double t : {0.3, 1.0, 2.5}) {
    const Eigen::Vector3d p3 = (t * a3).exp() * Eigen::Vector3d(1, 0, 0);
    const auto p4 = solve_classical_markov(x, {1, 0, 0, 0}, t);
    CHECK(std::abs(p3[0] - p4[0]) < 1e-12);
    CHECK(std::abs(p3[1] - p4[1]) < 1e-12);
    CHECK(std::abs(p3[2] - p4[2]) < 1e-12);
    CHECK(std::abs(p4[3]) < 1e-15);
  }
}

TEST_CASE("deterministic realisations agree pairwise") {
  RngStream rng(51);
  for (int i = 0; i < 10; ++i) {
    const MixtureWeights x = uniform_simplex_point(rng);
    const DensityMatrix rho0 = from_bloch(BlochVector(0.4, -0.3, 0.6));
    const TimeGrid fine(0.0, 5.0, 5000);
    const TimeGrid coarse(0.0, 5.0, 25);

    const auto analytic = analytic_trajectory(x, rho0, coarse);
    const auto ode = solve_time_local(mixture_rate_fn(x), rho0, fine);
    const auto volt =
        solve_volterra(kernel_components(x, KernelConvention::rederived), rho0, fine);
    const auto prop = propagator_trajectory(x, rho0, coarse);

    for (int m = 0; m < coarse.size(); ++m) {
      const int mf = m * (fine.steps / coarse.steps);
      CHECK(trace_distance(analytic.states[m], ode.states[mf]) < 1e-6);
      CHECK(trace_distance(analytic.states[m], volt.states[mf]) < 1e-6);
      CHECK(trace_distance(analytic.states[m], prop.states[m]) < 1e-6);
      CHECK(trace_distance(ode.states[mf], volt.states[mf]) < 1e-6);
    }
  }
}

TEST_CASE("records carry consistent probabilities") {
  const MixtureWeights x(0.5, 0.5, 0.0);
  const DensityMatrix rho0 = from_bloch(BlochVector(1, 0, 0));
  const TimeGrid grid(0.0, 2.0, 2000);
  const auto rec = solve_time_local(mixture_rate_fn(x), rho0, grid);
  REQUIRE(rec.probs.size() == rec.times.size());
  for (int m = 0; m < grid.size(); ++m) {
    const auto expect = channel_probs(x, grid.time(m));
    for (int j = 0; j < 4; ++j) CHECK(std::abs(rec.probs[m][j] - expect[j]) < 1e-7);
  }
}

TEST_CASE("probs_from_multipliers rejects far-off multipliers") {
  CHECK_THROWS_AS(probs_from_multipliers({1.0, 1.0, -1.5}), std::logic_error);
  const auto p = probs_from_multipliers({1.0, 1.0, 1.0 - 2e-7});  // tiny negative p clamped
  CHECK(p.p0 + p.p1 + p.p2 + p.p3 == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(TimeGrid(1.0, 0.5, 10), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(-0.5, 1.0, 10), std::invalid_argument);
}
