#pragma once

// Command-line front end. Subcommands run any realisation, divisibility
// classification or parameter-triangle analysis and write CSV or JSON
// artifacts. Identical argv (including --seed) produces byte-identical
// output files.

#include "dephmix/dephmix.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dephmix::cli {

using nlohmann::json;

struct RunConfig {
  std::string subcommand;
  std::string x_arg = "0.5,0.5";
  std::string rho0 = "bloch:1,0,0";
  std::string method = "analytic";
  std::string method_a = "analytic";
  std::string method_b = "ode";
  std::string direction = "discrete-axes";
  std::string mode = "exact-phase";
  std::string area_method = "paper-quadrature";
  std::string format;  // csv | json; default depends on subcommand
  std::string out;
  double t_max = 5.0;
  double t = 1.0;
  double step = 1e-3;
  double tol = 1e-6;
  int steps = 100;
  int resolution = 100;
  bool boundary = false;
  bool extended = false;
  std::vector<double> s_grid = {0.25, 2.0, 8};  // min,max,count
  std::vector<double> t_grid = {0.35, 2.5, 8};
  std::uint64_t seed = 0;
  std::size_t samples = 1000000;
  std::size_t traj = 100000;
  std::size_t runs = 100000;
};

namespace detail_cli {

inline std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("malformed number: " + item);
    out.push_back(v);
  }
  return out;
}

/// Weights given as "a,b" (third inferred) or "a,b,c" (validated on the
/// simplex within 1e-9), then renormalized to machine precision.
inline MixtureWeights parse_weights(const std::string& s) {
  auto v = split_doubles(s);
  if (v.size() == 2) v.push_back(1.0 - v[0] - v[1]);
  if (v.size() != 3) throw std::invalid_argument("--x expects two or three comma-separated values");
  double sum = 0.0;
  for (double& w : v) {
    if (w < -1e-9) throw std::invalid_argument("mixture weights must be nonnegative");
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("mixture weights must sum to one within 1e-9");
  return MixtureWeights(v[0] / sum, v[1] / sum, v[2] / sum);
}

inline DensityMatrix parse_rho0(const std::string& s) {
  if (s.rfind("bloch:", 0) == 0) {
    const auto v = split_doubles(s.substr(6));
    if (v.size() != 3) throw std::invalid_argument("bloch: expects three components");
    const double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (n2 > 1.0 + 1e-9) throw std::invalid_argument("bloch vector lies outside the unit ball");
    const double scale = n2 > 1.0 ? 1.0 / std::sqrt(n2) : 1.0;
    return from_bloch(BlochVector(v[0] * scale, v[1] * scale, v[2] * scale));
  }
  if (s == "plus") return from_bloch(BlochVector(1, 0, 0));
  if (s == "minus") return from_bloch(BlochVector(-1, 0, 0));
  if (s == "zero") return from_bloch(BlochVector(0, 0, 1));
  if (s == "one") return from_bloch(BlochVector(0, 0, -1));
  if (s == "mixed") return from_bloch(BlochVector(0, 0, 0));
  throw std::invalid_argument("unknown initial state: " + s);
}

inline DirectionSpec parse_direction(const std::string& s, const MixtureWeights& x) {
  if (s == "discrete-axes") return DirectionSpec::axes(x);
  if (s == "gaussian") return DirectionSpec::gaussian(x);
  if (s == "uniform-sphere") return DirectionSpec::sphere();
  throw std::invalid_argument("unknown direction kind: " + s);
}

struct MethodRun {
  TrajectoryRecord rec;
  std::vector<double> se;  // per-time Euclidean Bloch standard error; empty if exact
};

inline std::uint64_t time_seed(std::uint64_t seed, int index) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

inline std::vector<double> jump_se(const TrajectoryRecord& rec, const DensityMatrix& rho0,
                                   std::size_t runs) {
  const BlochVector b0 = to_bloch(rho0);
  const std::array<double, 3> b = {b0.b1, b0.b2, b0.b3};
  std::vector<double> se;
  for (const auto& p : rec.probs) {
    const auto s = hadamard4(p.to_array());
    double var = 0.0;
    for (int i = 0; i < 3; ++i)
      var += b[i] * b[i] * std::max(0.0, 1.0 - s[i + 1] * s[i + 1]) / static_cast<double>(runs);
    se.push_back(std::sqrt(var));
  }
  return se;
}

inline MethodRun run_method(const std::string& method, const MixtureWeights& x,
                            const DensityMatrix& rho0, const TimeGrid& grid,
                            const RunConfig& cfg) {
  MethodRun out;
  if (method == "analytic") {
    out.rec = analytic_trajectory(x, rho0, grid);
  } else if (method == "ode") {
    out.rec = solve_time_local(mixture_rate_fn(x), rho0, grid);
  } else if (method == "volterra") {
    out.rec = solve_volterra(kernel_components(x, KernelConvention::rederived), rho0, grid);
  } else if (method == "volterra-paper") {
    out.rec = solve_volterra(kernel_components(x, KernelConvention::paper), rho0, grid);
  } else if (method == "propagator") {
    out.rec = propagator_trajectory(x, rho0, grid);
  } else if (method == "embed") {
    std::vector<std::array<double, 3>> lams;
    for (int m = 0; m < grid.size(); ++m) lams.push_back(embedded_multipliers(x, grid.time(m)));
    out.rec = dephmix::detail::record_from_multipliers("embedded-gksl", lams, rho0, grid);
  } else if (method == "ru-mc") {
    const DirectionSpec spec = parse_direction(cfg.direction, x);
    const RuMode mode = cfg.mode == "pathwise" ? RuMode::pathwise : RuMode::exact_phase;
    out.rec.method = "random-unitary-mc";
    out.rec.seed = cfg.seed;
    out.rec.samples = cfg.traj;
    for (int m = 0; m < grid.size(); ++m) {
      const double t = grid.time(m);
      const RuEstimate est =
          ru_evolve(rho0, t, spec, cfg.traj, time_seed(cfg.seed, m), mode, cfg.step);
      out.rec.times.push_back(t);
      out.rec.states.push_back(est.state);
      out.rec.probs.push_back(est.probs);
      out.se.push_back(est.se);
    }
  } else if (method == "jump") {
    out.rec = jump_ensemble(x, rho0, grid, cfg.runs, cfg.seed);
    out.se = jump_se(out.rec, rho0, cfg.runs);
  } else if (method == "jump-extended") {
    out.rec = extended_jump_ensemble(x, rho0, grid, cfg.runs, cfg.seed);
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }
  return out;
}

inline json table_json(const std::string& header, std::vector<std::vector<json>> rows) {
  json out;
  out["columns"] = json::array();
  std::stringstream ss(header);
  std::string col;
  while (std::getline(ss, col, ',')) out["columns"].push_back(col);
  out["rows"] = std::move(rows);
  return out;
}

inline json record_table(const TrajectoryRecord& rec) {
  std::vector<std::vector<json>> rows;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    std::vector<json> row{rec.times[i]};
    if (i < rec.probs.size())
      for (int j = 0; j < 4; ++j) row.push_back(rec.probs[i][j]);
    else
      for (int j = 0; j < 4; ++j) row.push_back(nullptr);
    const BlochVector b = to_bloch(rec.states[i]);
    row.push_back(b.b1);
    row.push_back(b.b2);
    row.push_back(b.b3);
    rows.push_back(std::move(row));
  }
  return table_json(kEvolveHeader, std::move(rows));
}

inline void write_output(const RunConfig& cfg, const json& config_echo, const json& results,
                         const std::string& csv_body) {
  std::ofstream os(cfg.out, std::ios::binary);
  if (!os) throw std::invalid_argument("cannot open output path: " + cfg.out);
  if (cfg.format == "json") {
    json doc;
    doc["version"] = kSchemaVersion;
    doc["config"] = config_echo;
    doc["results"] = results;
    os << doc.dump(2) << "\n";
  } else {
    os << csv_body;
  }
}

}  // namespace detail_cli

/// Parse and execute. Returns 0 on success, 2 on usage/validation errors,
/// 1 on internal errors.
inline int run(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"dephasing-mixture qubit dynamics toolkit"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool needs_x) {
    auto* x_opt = sub->add_option("--x", cfg.x_arg,
                                  "mixture weights: x1,x2 (third inferred) or x1,x2,x3");
    if (!needs_x) x_opt->group("");
    sub->add_option("--seed", cfg.seed, "master RNG seed");
    sub->add_option("--out", cfg.out, "output path")->required();
    sub->add_option("--format", cfg.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    return sub;
  };

  auto* evolve = add_common(app.add_subcommand("evolve", "evolve an initial state"), true);
  evolve->add_option("--method", cfg.method,
                     "analytic | ode | volterra | volterra-paper | propagator | ru-mc | jump | "
                     "jump-extended | embed");
  evolve->add_option("--t-max", cfg.t_max, "final time (dephasing-rate units)");
  evolve->add_option("--steps", cfg.steps, "grid steps");
  evolve->add_option("--rho0", cfg.rho0, "bloch:b1,b2,b3 | plus | minus | zero | one | mixed");
  evolve->add_option("--traj", cfg.traj, "trajectories for ru-mc");
  evolve->add_option("--runs", cfg.runs, "runs for jump ensembles");
  evolve->add_option("--direction", cfg.direction,
                     "discrete-axes | gaussian | uniform-sphere (ru-mc)");
  evolve->add_option("--mode", cfg.mode, "exact-phase | pathwise (ru-mc)");
  evolve->add_option("--h", cfg.step, "pathwise step size");

  auto* rates_cmd = add_common(app.add_subcommand("rates", "decoherence rates over time"), true);
  rates_cmd->add_option("--t-max", cfg.t_max);
  rates_cmd->add_option("--steps", cfg.steps);

  auto* classify_cmd =
      add_common(app.add_subcommand("classify", "divisibility flags over time"), true);
  classify_cmd->add_option("--t-max", cfg.t_max);
  classify_cmd->add_option("--steps", cfg.steps);

  auto* triangle_cmd =
      add_common(app.add_subcommand("triangle", "rate-sign region over the simplex"), false);
  triangle_cmd->add_option("--t", cfg.t, "evaluation time");
  triangle_cmd->add_option("--resolution", cfg.resolution, "barycentric grid resolution");
  triangle_cmd->add_flag("--boundary", cfg.boundary,
                         "emit the asymptotic-region boundary curve instead");

  auto* area_cmd =
      add_common(app.add_subcommand("area", "non-CP-divisible fraction of the triangle"), false);
  area_cmd->add_option("--method", cfg.area_method, "paper-quadrature | monte-carlo");
  area_cmd->add_option("--samples", cfg.samples, "Monte Carlo samples");

  auto* jump_cmd = add_common(app.add_subcommand("jump-sim", "classical jump-process ensemble"), true);
  jump_cmd->add_option("--t-max", cfg.t_max);
  jump_cmd->add_option("--steps", cfg.steps);
  jump_cmd->add_option("--runs", cfg.runs);
  jump_cmd->add_option("--rho0", cfg.rho0);
  jump_cmd->add_flag("--extended", cfg.extended, "use the dim-16 orthogonal-state realisation");

  auto* embed_cmd =
      add_common(app.add_subcommand("embed", "bipartite GKSL embedding evolution"), true);
  embed_cmd->add_option("--t-max", cfg.t_max);
  embed_cmd->add_option("--steps", cfg.steps);
  embed_cmd->add_option("--rho0", cfg.rho0);

  auto* violate_cmd = add_common(
      app.add_subcommand("violate", "two-qubit P-divisibility witness search"), true);
  violate_cmd->add_option("--s-grid", cfg.s_grid, "min,max,count")->expected(3);
  violate_cmd->add_option("--t-grid", cfg.t_grid, "min,max,count")->expected(3);

  auto* compare_cmd =
      add_common(app.add_subcommand("compare", "distance between two realisations"), true);
  compare_cmd->add_option("--method-a", cfg.method_a);
  compare_cmd->add_option("--method-b", cfg.method_b);
  compare_cmd->add_option("--t-max", cfg.t_max);
  compare_cmd->add_option("--steps", cfg.steps);
  compare_cmd->add_option("--rho0", cfg.rho0);
  compare_cmd->add_option("--traj", cfg.traj);
  compare_cmd->add_option("--runs", cfg.runs);
  compare_cmd->add_option("--direction", cfg.direction);
  compare_cmd->add_option("--mode", cfg.mode);
  compare_cmd->add_option("--tol", cfg.tol, "tolerance for deterministic pairs");

  std::vector<const char*> argv;
  argv.push_back("dephmix");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    using namespace detail_cli;

    if (evolve->parsed() || jump_cmd->parsed() || embed_cmd->parsed()) {
      cfg.subcommand = evolve->parsed() ? "evolve" : jump_cmd->parsed() ? "jump-sim" : "embed";
      if (cfg.format.empty()) cfg.format = "csv";
      const MixtureWeights x = parse_weights(cfg.x_arg);
      const DensityMatrix rho0 = parse_rho0(cfg.rho0);
      const TimeGrid grid(0.0, cfg.t_max, cfg.steps);
      std::string method = cfg.method;
      if (jump_cmd->parsed()) method = cfg.extended ? "jump-extended" : "jump";
      if (embed_cmd->parsed()) method = "embed";
      const MethodRun run = run_method(method, x, rho0, grid, cfg);

      std::ostringstream csv;
      write_evolve_csv(csv, run.rec);
      json config{{"subcommand", cfg.subcommand}, {"x", {x.x1, x.x2, x.x3}},
                  {"method", method},            {"t_max", cfg.t_max},
                  {"steps", cfg.steps},          {"rho0", cfg.rho0},
                  {"seed", cfg.seed}};
      json results = record_table(run.rec);
      if (embed_cmd->parsed()) {
        const EmbeddedEvolution emb = evolve_embedded(rho0, x, cfg.t_max);
        results["structure"] = {{"ancilla_drift", emb.ancilla_drift},
                                {"ancilla_offdiag", emb.ancilla_offdiag},
                                {"block_separable", emb.block_separable}};
      }
      write_output(cfg, config, results, csv.str());
      return 0;
    }

    if (rates_cmd->parsed()) {
      cfg.subcommand = "rates";
      if (cfg.format.empty()) cfg.format = "csv";
      const MixtureWeights x = parse_weights(cfg.x_arg);
      const TimeGrid grid(0.0, cfg.t_max, cfg.steps);
      std::ostringstream csv;
      write_rates_csv(csv, x, grid);
      std::vector<std::vector<json>> rows;
      for (int m = 0; m < grid.size(); ++m) {
        const RateDiagnostics r = rates(x, grid.time(m));
        rows.push_back({r.t, r.gamma1, r.gamma2, r.gamma3, r.mu1, r.mu2, r.mu3});
      }
      write_output(cfg,
                   json{{"subcommand", "rates"},
                        {"x", {x.x1, x.x2, x.x3}},
                        {"t_max", cfg.t_max},
                        {"steps", cfg.steps}},
                   table_json(kRatesHeader, std::move(rows)), csv.str());
      return 0;
    }

    if (classify_cmd->parsed()) {
      cfg.subcommand = "classify";
      if (cfg.format.empty()) cfg.format = "csv";
      const MixtureWeights x = parse_weights(cfg.x_arg);
      const TimeGrid grid(0.0, cfg.t_max, cfg.steps);
      const DivisibilityReport rep = classify(x, grid);
      std::ostringstream csv;
      write_classify_csv(csv, rep);
      std::vector<std::vector<json>> rows;
      for (int m = 0; m < grid.size(); ++m)
        rows.push_back({grid.time(m), rep.cpt[m], rep.cp_divisible[m], rep.p_divisible[m],
                        rep.blp_monotone[m], rep.geometric_markov[m]});
      json results = table_json(kClassifyHeader, std::move(rows));
      if (rep.first_negative_rate)
        results["first_negative_rate"] = {{"rate_index", rep.first_negative_rate->first + 1},
                                          {"time", rep.first_negative_rate->second}};
      write_output(cfg,
                   json{{"subcommand", "classify"},
                        {"x", {x.x1, x.x2, x.x3}},
                        {"t_max", cfg.t_max},
                        {"steps", cfg.steps}},
                   results, csv.str());
      return 0;
    }

    if (triangle_cmd->parsed()) {
      cfg.subcommand = "triangle";
      if (cfg.format.empty()) cfg.format = "csv";
      std::ostringstream csv;
      json results;
      if (cfg.boundary) {
        const auto pts = newton_cubic_boundary(cfg.resolution);
        write_boundary_csv(csv, pts);
        std::vector<std::vector<json>> rows;
        for (const auto& p : pts)
          rows.push_back({p.x.x1, p.x.x2, p.x.x3, p.branch, p.cubic_x, p.cubic_y});
        results = table_json(kBoundaryHeader, std::move(rows));
      } else {
        const auto cells = region_grid(cfg.t, cfg.resolution);
        write_triangle_csv(csv, cells, cfg.t);
        std::vector<std::vector<json>> rows;
        for (const auto& c : cells)
          rows.push_back({c.x.x1, c.x.x2, c.x.x3, cfg.t, to_string(c.status)});
        results = table_json(kTriangleHeader, std::move(rows));
      }
      write_output(cfg,
                   json{{"subcommand", "triangle"},
                        {"t", cfg.t},
                        {"resolution", cfg.resolution},
                        {"boundary", cfg.boundary}},
                   results, csv.str());
      return 0;
    }

    if (area_cmd->parsed()) {
      cfg.subcommand = "area";
      if (cfg.format.empty()) cfg.format = "json";
      AreaMethod method;
      if (cfg.area_method == "paper-quadrature")
        method = AreaMethod::paper_quadrature;
      else if (cfg.area_method == "monte-carlo")
        method = AreaMethod::monte_carlo;
      else
        throw std::invalid_argument("unknown area method: " + cfg.area_method);
      const double frac = area_fraction(method, cfg.samples, cfg.seed);
      json results{{"non_cp_divisible_fraction", frac},
                   {"cp_divisible_fraction", 1.0 - frac},
                   {"method", cfg.area_method}};
      if (method == AreaMethod::monte_carlo) results["samples"] = cfg.samples;
      std::ostringstream csv;
      csv << "key,value\n"
          << "non_cp_divisible_fraction," << format_double(frac) << "\n"
          << "cp_divisible_fraction," << format_double(1.0 - frac) << "\n";
      write_output(cfg,
                   json{{"subcommand", "area"},
                        {"method", cfg.area_method},
                        {"samples", cfg.samples},
                        {"seed", cfg.seed}},
                   results, csv.str());
      return 0;
    }

    if (violate_cmd->parsed()) {
      cfg.subcommand = "violate";
      if (cfg.format.empty()) cfg.format = "json";
      const MixtureWeights x = parse_weights(cfg.x_arg);
      auto linspace = [](const std::vector<double>& spec) {
        const int n = static_cast<int>(spec[2]);
        std::vector<double> v;
        for (int i = 0; i < n; ++i)
          v.push_back(spec[0] + (n == 1 ? 0.0 : (spec[1] - spec[0]) * i / (n - 1)));
        return v;
      };
      const TwoQubitViolation v =
          two_qubit_violation(x, linspace(cfg.s_grid), linspace(cfg.t_grid), cfg.seed);
      json results{{"found", v.found},
                   {"max_derivative", v.max_derivative},
                   {"s", v.s},
                   {"t", v.t},
                   {"witness_kind", v.witness_kind}};
      std::ostringstream csv;
      csv << "key,value\n"
          << "found," << (v.found ? 1 : 0) << "\n"
          << "max_derivative," << format_double(v.max_derivative) << "\n"
          << "s," << format_double(v.s) << "\n"
          << "t," << format_double(v.t) << "\n"
          << "witness_kind," << v.witness_kind << "\n";
      write_output(cfg,
                   json{{"subcommand", "violate"},
                        {"x", {x.x1, x.x2, x.x3}},
                        {"s_grid", cfg.s_grid},
                        {"t_grid", cfg.t_grid},
                        {"seed", cfg.seed}},
                   results, csv.str());
      return 0;
    }

    if (compare_cmd->parsed()) {
      cfg.subcommand = "compare";
      if (cfg.format.empty()) cfg.format = "json";
      const MixtureWeights x = parse_weights(cfg.x_arg);
      const DensityMatrix rho0 = parse_rho0(cfg.rho0);
      const TimeGrid grid(0.0, cfg.t_max, cfg.steps);
      const MethodRun a = run_method(cfg.method_a, x, rho0, grid, cfg);
      const MethodRun b = run_method(cfg.method_b, x, rho0, grid, cfg);

      const bool stochastic = !a.se.empty() || !b.se.empty();
      std::vector<double> dist, threshold;
      double max_dist = 0.0;
      bool pass = true;
      for (int m = 0; m < grid.size(); ++m) {
        const double d = trace_distance(a.rec.states[m], b.rec.states[m]);
        dist.push_back(d);
        max_dist = std::max(max_dist, d);
        double thr = cfg.tol;
        if (stochastic) {
          const double sa = a.se.empty() ? 0.0 : a.se[m];
          const double sb = b.se.empty() ? 0.0 : b.se[m];
          thr = std::max(1e-12, 3.0 * 0.5 * std::sqrt(sa * sa + sb * sb));
        }
        threshold.push_back(thr);
        pass = pass && d <= thr;
      }

      json results{{"times", json::array()},   {"distance", json::array()},
                   {"threshold", json::array()}, {"max_distance", max_dist},
                   {"stochastic", stochastic},  {"pass", pass}};
      for (int m = 0; m < grid.size(); ++m) {
        results["times"].push_back(grid.time(m));
        results["distance"].push_back(dist[m]);
        results["threshold"].push_back(threshold[m]);
      }
      std::ostringstream csv;
      csv << "t,distance,threshold\n";
      for (int m = 0; m < grid.size(); ++m)
        csv << format_double(grid.time(m)) << ',' << format_double(dist[m]) << ','
            << format_double(threshold[m]) << "\n";
      write_output(cfg,
                   json{{"subcommand", "compare"},
                        {"x", {x.x1, x.x2, x.x3}},
                        {"method_a", cfg.method_a},
                        {"method_b", cfg.method_b},
                        {"t_max", cfg.t_max},
                        {"steps", cfg.steps},
                        {"rho0", cfg.rho0},
                        {"seed", cfg.seed}},
                   results, csv.str());
      return pass ? 0 : 1;
    }

    throw std::invalid_argument("no subcommand given");
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}

}  // namespace dephmix::cli
