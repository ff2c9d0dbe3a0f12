// qglab command-line front end.

#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "output.hpp"
#include "qglab/generators.hpp"
#include "qglab/geometry.hpp"
#include "qglab/graph_io.hpp"
#include "qglab/harnack.hpp"
#include "qglab/heat.hpp"
#include "qglab/report.hpp"
#include "suite.hpp"

using namespace qglab;
using namespace qglab::tools;
using nlohmann::json;

namespace {

struct Common {
  std::string graph = "-";
  double h = 0.05;
  double dt = 1e-3;
  double theta = 0.5;
  std::int64_t seed = 0;
  std::string csv;
};

MetricGraph read_graph(const std::string& path) {
  if (path == "-") {
    const std::string text{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    try {
      return parse_graph(text);
    } catch (const GraphError& e) {
      throw ConfigError(std::string("graph on stdin: ") + e.what());
    }
  }
  try {
    return load_graph(path);
  } catch (const GraphError& e) {
    throw ConfigError(e.what());
  }
}

void add_common(CLI::App* app, Common& c, bool heat) {
  app->add_option("--graph", c.graph, "graph JSON file, '-' for stdin")->capture_default_str();
  app->add_option("--h", c.h, "mesh size")->capture_default_str();
  if (heat) {
    app->add_option("--dt", c.dt, "time-step cap")->capture_default_str();
    app->add_option("--theta", c.theta, "theta of the time scheme (0.5 = Crank-Nicolson)")->capture_default_str();
  }
  app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  app->add_option("--csv", c.csv, "write tables to <prefix>[suffix].csv");
}

/// Runs one check from command-line parameters and prints its rows.
int run_single(const std::string& kind, const Common& c, json params, unsigned threads, bool print_rows = true) {
  CheckContext ctx;
  ctx.graph = std::make_shared<const MetricGraph>(read_graph(c.graph));
  ctx.h = c.h;
  ctx.dt = c.dt;
  ctx.theta = c.theta;
  ctx.seed = static_cast<std::uint64_t>(c.seed);
  ctx.threads = threads;
  CheckSpec spec{kind, kind, true, std::move(params)};
  const CheckRunner runner = prepare_check(spec, ctx);
  const CheckOutput out = runner();
  if (print_rows) {
    for (const json& row : out.rows) write_json_line(std::cout, row);
  }
  if (!c.csv.empty()) {
    for (const auto& [suffix, text] : out.tables) {
      std::ofstream file(c.csv + suffix + ".csv", std::ios::binary | std::ios::trunc);
      if (!file) throw ConfigError("cannot write '" + c.csv + suffix + ".csv'");
      file << text;
    }
  }
  std::cerr << (out.pass ? "PASS" : "FAIL") << ": " << out.summary << '\n';
  return out.pass ? kExitOk : kExitFailedChecks;
}

json list(const std::vector<std::string>& v) { return json(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qglab: analysis on metric graphs"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  int thread_flag = 0;
  app.add_option("--threads", thread_flag, "worker threads (default: QGLAB_THREADS or hardware)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a graph and print its JSON");
  std::string gen_type = "star";
  int rays = 3, dim = 1, side = 10, branching = 2, depth = 3;
  double len = 1.0, len_lo = 1.0, len_hi = 1.0;
  std::int64_t len_seed = 0;
  std::string gen_out;
  gen->add_option("--type", gen_type, "star | lattice | tree")
      ->check(CLI::IsMember({"star", "lattice", "tree"}))
      ->capture_default_str();
  gen->add_option("--rays", rays, "star: number of rays")->capture_default_str();
  gen->add_option("--len", len, "star: ray length; tree: edge length")->capture_default_str();
  gen->add_option("--dim", dim, "lattice: dimension (1 or 2)")->capture_default_str();
  gen->add_option("--side", side, "lattice: box side")->capture_default_str();
  gen->add_option("--len-lo", len_lo, "lattice: minimum edge length")->capture_default_str();
  gen->add_option("--len-hi", len_hi, "lattice: maximum edge length")->capture_default_str();
  gen->add_option("--len-seed", len_seed, "lattice: seed for random lengths")->capture_default_str();
  gen->add_option("--branching", branching, "tree: children per vertex")->capture_default_str();
  gen->add_option("--depth", depth, "tree: depth")->capture_default_str();
  gen->add_option("--out", gen_out, "write to a file instead of stdout");

  // dist
  auto* dist = app.add_subcommand("dist", "distance between two points");
  Common dist_c;
  std::string from, to;
  bool weighted = false;
  dist->add_option("--graph", dist_c.graph, "graph JSON file, '-' for stdin")->capture_default_str();
  dist->add_option("--from", from, "point literal")->required();
  dist->add_option("--to", to, "point literal")->required();
  dist->add_flag("--weighted", weighted, "intrinsic metric of the weighted form");

  // ball
  auto* ball = app.add_subcommand("ball", "exact ball geometry");
  Common ball_c;
  std::vector<std::string> ball_centers;
  std::vector<double> ball_radii;
  add_common(ball, ball_c, false);
  ball->add_option("--center", ball_centers, "point literal (repeatable)")->required();
  ball->add_option("--radius", ball_radii, "radius (repeatable)")->required();

  // doubling
  auto* doubling = app.add_subcommand("doubling", "volume doubling scan");
  Common dbl_c;
  std::vector<std::string> dbl_centers;
  std::vector<double> dbl_radii;
  std::size_t dbl_random = 0;
  add_common(doubling, dbl_c, false);
  doubling->add_option("--center", dbl_centers, "point literal (repeatable)");
  doubling->add_option("--random", dbl_random, "additional random centers");
  doubling->add_option("--radius", dbl_radii, "radius (repeatable)")->required();

  // poincare
  auto* poincare = app.add_subcommand("poincare", "Neumann gap and Poincare constant of a ball");
  Common pc_c;
  std::string pc_center;
  double pc_radius = 1.0;
  std::size_t pc_random = 5;
  add_common(poincare, pc_c, false);
  poincare->add_option("--center", pc_center, "point literal")->required();
  poincare->add_option("--radius", pc_radius, "radius")->required();
  poincare->add_option("--random", pc_random, "random test functions")->capture_default_str();

  // sobolev
  auto* sobolev = app.add_subcommand("sobolev", "Sobolev-type inequalities on random test functions");
  Common sb_c;
  std::string sb_form = "compact", sb_p = "2", sb_q;
  std::size_t sb_samples = 20;
  std::vector<std::string> sb_centers;
  double sb_radius = 0.0, sb_delta = 0.5;
  double sb_nu = 0.0;
  add_common(sobolev, sb_c, false);
  sobolev->add_option("--form", sb_form, "compact | infinite | local | weighted-poincare")
      ->check(CLI::IsMember({"compact", "infinite", "local", "weighted-poincare"}))
      ->capture_default_str();
  sobolev->add_option("--p", sb_p, "exponent p (number or inf)")->capture_default_str();
  sobolev->add_option("--q", sb_q, "exponent q (default p)");
  sobolev->add_option("--samples", sb_samples, "number of test functions")->capture_default_str();
  sobolev->add_option("--center", sb_centers, "support centers (repeatable)");
  sobolev->add_option("--radius", sb_radius, "support radius");
  sobolev->add_option("--delta", sb_delta, "weighted Poincare cut-off width")->capture_default_str();
  auto* nu_opt = sobolev->add_option("--nu", sb_nu, "local dimension override");

  // nash
  auto* nash = app.add_subcommand("nash", "Nash inequality on supported test functions");
  Common nash_c;
  std::size_t nash_samples = 50;
  std::vector<std::string> nash_centers;
  double nash_radius = 1.0;
  add_common(nash, nash_c, false);
  nash->add_option("--samples", nash_samples, "number of test functions")->capture_default_str();
  nash->add_option("--center", nash_centers, "support centers (repeatable)")->required();
  nash->add_option("--radius", nash_radius, "support radius")->capture_default_str();

  // kernel
  auto* kernel = app.add_subcommand("kernel", "heat kernel p(t, ., y)");
  Common k_c;
  std::string k_source, k_compare = "none";
  std::vector<double> k_times;
  double k_max_d = 3.0, k_tol = 0.02;
  add_common(kernel, k_c, true);
  kernel->add_option("--source", k_source, "point literal y")->required();
  kernel->add_option("--t,--time", k_times, "time (repeatable, increasing)")->required();
  kernel->add_option("--compare", k_compare, "none | line | half-line | star")
      ->check(CLI::IsMember({"none", "line", "half-line", "star"}))
      ->capture_default_str();
  kernel->add_option("--max-distance", k_max_d, "comparison radius")->capture_default_str();
  kernel->add_option("--tolerance", k_tol, "relative error tolerance")->capture_default_str();

  // harnack-parabolic
  auto* hp = app.add_subcommand("harnack-parabolic", "sup over Q- / inf over Q+ for nonnegative solutions");
  Common hp_c;
  std::string hp_center;
  double hp_radius = 1.0, eps = 0.25, eta = 0.5, sigma = 0.75, zeta = 0.5, warmup = 0.1;
  std::vector<std::string> kernel_seeds, bump_seeds;
  std::vector<double> constant_seeds;
  add_common(hp, hp_c, true);
  hp->add_option("--center", hp_center, "cylinder center")->required();
  hp->add_option("--radius", hp_radius, "cylinder radius")->capture_default_str();
  hp->add_option("--epsilon", eps, "Q- starts at s + epsilon r^2")->capture_default_str();
  hp->add_option("--eta", eta, "Q- ends at s + eta r^2")->capture_default_str();
  hp->add_option("--sigma", sigma, "Q+ starts at s + sigma r^2 and ends at s + r^2")->capture_default_str();
  hp->add_option("--zeta", zeta, "spatial ball B(x, zeta r) of both cylinders")->capture_default_str();
  hp->add_option("--warmup", warmup, "warm-up as a fraction of r^2")->capture_default_str();
  hp->add_option("--kernel-seed", kernel_seeds, "heat kernel source (repeatable)");
  hp->add_option("--bump-seed", bump_seeds, "POINT@WIDTH hat initial datum (repeatable)");
  hp->add_option("--constant-seed", constant_seeds, "constant level (repeatable)");

  // harnack-elliptic
  auto* he = app.add_subcommand("harnack-elliptic", "harmonic functions on B_2r, sup/inf over B_r");
  Common he_c;
  std::string he_center;
  double he_radius = 1.0;
  std::vector<std::string> he_boundary;
  std::size_t he_random = 0;
  add_common(he, he_c, false);
  he->add_option("--center", he_center, "ball center")->required();
  he->add_option("--radius", he_radius, "inner radius r")->capture_default_str();
  he->add_option("--boundary", he_boundary, "comma-separated boundary values (repeatable)");
  he->add_option("--random", he_random, "random boundary samples")->capture_default_str();
  bool he_points = false;
  he->add_flag("--boundary-points", he_points, "only list the boundary points in value order");

  // gaussian-fit
  auto* gf = app.add_subcommand("gaussian-fit", "feasible constants of two-sided Gaussian bounds");
  Common gf_c;
  std::vector<std::string> gf_sources, gf_targets;
  std::vector<double> gf_times;
  double gf_max_d = 2.0, gf_tol = 1e-2, gf_contains = 0.0;
  add_common(gf, gf_c, true);
  gf->add_option("--source", gf_sources, "source point (repeatable)")->required();
  gf->add_option("--target", gf_targets, "target point (repeatable)");
  gf->add_option("--t,--time", gf_times, "time (repeatable, increasing)");
  gf->add_option("--max-distance", gf_max_d, "keep targets with d <= this")->capture_default_str();
  gf->add_option("--tolerance", gf_tol, "relative slack for the discrete kernel")->capture_default_str();
  auto* contains_opt = gf->add_option("--contains", gf_contains, "assert this C lies in both feasible intervals");

  // suite
  auto* suite = app.add_subcommand("suite", "run a TOML suite");
  std::string config_path, out_dir;
  suite->add_option("--config", config_path, "suite TOML")->required();
  suite->add_option("--out", out_dir, "override the output directory");

  CLI11_PARSE(app, argc, argv);
  const unsigned threads = resolve_thread_count(thread_flag);

  try {
    if (*gen) {
      MetricGraph g;
      try {
        if (gen_type == "star") g = gen_star(rays, len);
        if (gen_type == "lattice") {
          g = len_lo == 1.0 && len_hi == 1.0
                  ? gen_lattice(dim, side)
                  : gen_lattice(dim, side, LatticeLengths::uniform(len_lo, len_hi, static_cast<std::uint64_t>(len_seed)));
        }
        if (gen_type == "tree") g = gen_tree(branching, depth, len);
      } catch (const GraphError& e) {
        throw ConfigError(e.what());
      }
      if (gen_out.empty()) {
        std::cout << dump_graph(g) << '\n';
      } else {
        save_graph(g, gen_out);
      }
      return kExitOk;
    }
    if (*dist) {
      const MetricGraph g = read_graph(dist_c.graph);
      Point x, y;
      try {
        x = parse_point(g, from);
        y = parse_point(g, to);
      } catch (const GraphError& e) {
        throw ConfigError(e.what());
      }
      std::cout << format_number(weighted ? weighted_distance(g, x, y) : distance(g, x, y)) << '\n';
      return kExitOk;
    }
    if (*ball) return run_single("ball", ball_c, {{"centers", list(ball_centers)}, {"radii", ball_radii}}, threads);
    if (*doubling) {
      json p{{"radii", dbl_radii}, {"random_centers", dbl_random}};
      if (!dbl_centers.empty()) p["centers"] = list(dbl_centers);
      return run_single("doubling", dbl_c, p, threads);
    }
    if (*poincare) {
      json p{{"center", pc_center}, {"radius", pc_radius}, {"random", pc_random}};
      if (!poincare->get_option("--h")->empty()) p["h"] = pc_c.h;
      return run_single("poincare", pc_c, p, threads);
    }
    if (*sobolev) {
      auto exponent = [](const std::string& s) { return s == "inf" ? json("inf") : json(std::stod(s)); };
      json p{{"form", sb_form}, {"p", exponent(sb_p)}, {"samples", sb_samples}};
      if (!sb_q.empty()) p["q"] = exponent(sb_q);
      if (!sb_centers.empty()) p["centers"] = list(sb_centers);
      if (sb_radius > 0.0) p["radius"] = sb_radius;
      if (sb_form == "weighted-poincare") p["delta"] = sb_delta;
      if (!nu_opt->empty()) p["nu"] = sb_nu;
      return run_single("sobolev", sb_c, p, threads);
    }
    if (*nash) {
      return run_single("nash", nash_c,
                        {{"samples", nash_samples}, {"centers", list(nash_centers)}, {"radius", nash_radius}}, threads);
    }
    if (*kernel) {
      json p{{"source", k_source},     {"times", k_times},     {"compare", k_compare},
             {"max_distance", k_max_d}, {"tolerance", k_tol}, {"dump", !k_c.csv.empty()}};
      return run_single("kernel", k_c, p, threads);
    }
    if (*hp) {
      json seeds = json::array();
      for (const std::string& s : kernel_seeds) seeds.push_back({{"kind", "kernel"}, {"source", s}});
      for (const std::string& s : bump_seeds) {
        const auto at = s.rfind('@');
        if (at == std::string::npos) throw ConfigError("--bump-seed expects POINT@WIDTH");
        seeds.push_back({{"kind", "bump"}, {"source", s.substr(0, at)}, {"width", std::stod(s.substr(at + 1))}});
      }
      for (double level : constant_seeds) seeds.push_back({{"kind", "constant"}, {"level", level}});
      if (seeds.empty()) seeds.push_back({{"kind", "kernel"}, {"source", hp_center}});
      json p{{"center", hp_center}, {"radius", hp_radius}, {"epsilon", eps}, {"eta", eta},   {"sigma", sigma},
             {"zeta", zeta},        {"warmup", warmup},    {"seeds", seeds}};
      return run_single("harnack-parabolic", hp_c, p, threads);
    }
    if (*he) {
      if (he_points) {
        const MetricGraph g = read_graph(he_c.graph);
        Point x;
        try {
          x = parse_point(g, he_center);
        } catch (const GraphError& e) {
          throw ConfigError(e.what());
        }
        for (const Point& b : harmonic_boundary_points(g, x, 2.0 * he_radius, he_c.h)) {
          std::cout << format_point(g, b) << '\n';
        }
        return kExitOk;
      }
      json samples = json::array();
      for (const std::string& row : he_boundary) {
        json values = json::array();
        std::stringstream in(row);
        std::string item;
        while (std::getline(in, item, ',')) values.push_back(std::stod(item));
        samples.push_back(values);
      }
      json p{{"center", he_center}, {"radius", he_radius}, {"random", he_random}};
      if (!samples.empty()) p["boundary"] = samples;
      return run_single("harnack-elliptic", he_c, p, threads);
    }
    if (*gf) {
      json p{{"sources", list(gf_sources)}, {"targets", list(gf_targets)}, {"max_distance", gf_max_d},
             {"tolerance", gf_tol}};
      if (!gf_times.empty()) p["times"] = gf_times;
      if (!contains_opt->empty()) p["contains"] = gf_contains;
      return run_single("gaussian-fit", gf_c, p, threads);
    }
    if (*suite) {
      SuiteConfig cfg;
      try {
        cfg = load_suite_config(config_path);
      } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
      }
      const SuiteResult result = run_suite(cfg, RunOptions{threads, out_dir});
      print_summary(std::cout, result);
      return result.exit_code;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}
