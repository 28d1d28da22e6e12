#ifndef LRCONE_CLI_HPP
#define LRCONE_CLI_HPP

// Command-line front end. Kept in a header so tests can drive every
// subcommand in-process through run().

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lrcone/io.hpp"

namespace lrcone::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kFidelity = 2, kNumerical = 3 };

struct CountParams {
  int n_max = 20;
  std::vector<int> distances{1, 2, 3};
  std::string fidelity_path;
};

struct BoundParams {
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<int> distances{1, 2, 4, 6, 8};
  std::string source = "dp";
  int threads = 1;
};

struct VelocityParams {
  int d_min = 10;
  int d_max = 40;
  int n_max = 256;
  int n_max_limit = 1024;
};

struct ScanParams {
  std::vector<double> dimensions{2, 3, 4, 5, 10, 100, 1000};
};

struct HorizonParams {
  double D_in = 100;
  double alpha = 0.01;
  double t_i = 0;
  double t_f = 50;
  int steps = 101;
  std::string convention = "both";
  std::string mode = "strict";
};

/// Every input of a run. Echoed into each output so the run can be replayed
/// with --config.
struct RunConfig {
  std::string command;
  Couplings couplings;
  /// extent 0 lets the counting lattice size itself from the extent guard.
  LatticeSpec lattice{2, 0, Boundary::periodic};
  double rel_tol = 1e-10;
  double epsilon = 1e-8;
  double quad_tol = 1e-8;
  std::string output_path;
  std::string format;
  CountParams count;
  BoundParams bound;
  VelocityParams velocity;
  ScanParams scan;
  HorizonParams horizon;
};

inline Json to_json(const RunConfig& c) {
  return {
      {"command", c.command},
      {"couplings", lrcone::to_json(c.couplings)},
      {"lattice", lrcone::to_json(c.lattice)},
      {"tolerances", {{"rel_tol", c.rel_tol}, {"epsilon", c.epsilon}, {"quad_tol", c.quad_tol}}},
      {"output", {{"path", c.output_path}, {"format", c.format}}},
      {"count", {{"n_max", c.count.n_max}, {"d", c.count.distances}, {"fidelity", c.count.fidelity_path}}},
      {"bound",
       {{"t", c.bound.times}, {"d", c.bound.distances}, {"source", c.bound.source}, {"threads", c.bound.threads}}},
      {"velocity",
       {{"d_min", c.velocity.d_min},
        {"d_max", c.velocity.d_max},
        {"n_max", c.velocity.n_max},
        {"n_max_limit", c.velocity.n_max_limit}}},
      {"scan_dim", {{"D", c.scan.dimensions}}},
      {"horizon",
       {{"D_in", c.horizon.D_in},
        {"alpha", c.horizon.alpha},
        {"t_i", c.horizon.t_i},
        {"t_f", c.horizon.t_f},
        {"steps", c.horizon.steps},
        {"convention", c.horizon.convention},
        {"mode", c.horizon.mode}}},
  };
}

namespace detail {

template <class T>
void take(const Json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config section '" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
      throw std::invalid_argument("unknown config key '" + where + "." + k + "'");
  }
}

}  // namespace detail

/// Overlay the keys present in `j` onto `c`.
inline void apply_json(RunConfig& c, const Json& j) {
  using detail::check_keys;
  using detail::take;
  // Output headers nest the echo under "config".
  if (j.is_object() && j.contains("config")) {
    apply_json(c, j.at("config"));
    return;
  }
  check_keys(j,
             {"schema_version", "command", "couplings", "lattice", "tolerances", "output", "count", "bound", "velocity",
              "scan_dim", "horizon"},
             "");
  if (j.contains("couplings")) {
    const auto& s = j["couplings"];
    check_keys(s, {"g", "J", "norm_P", "norm_Q", "step_factor"}, "couplings");
    take(s, "g", c.couplings.g);
    take(s, "J", c.couplings.J);
    take(s, "norm_P", c.couplings.norm_p);
    take(s, "norm_Q", c.couplings.norm_q);
    take(s, "step_factor", c.couplings.step_factor);
  }
  if (j.contains("lattice")) {
    const auto& s = j["lattice"];
    check_keys(s, {"dimension", "extent", "boundary"}, "lattice");
    take(s, "dimension", c.lattice.dimension);
    take(s, "extent", c.lattice.extent);
    if (s.contains("boundary")) c.lattice.boundary = parse_boundary(s["boundary"].get<std::string>());
  }
  if (j.contains("tolerances")) {
    const auto& s = j["tolerances"];
    check_keys(s, {"rel_tol", "epsilon", "quad_tol"}, "tolerances");
    take(s, "rel_tol", c.rel_tol);
    take(s, "epsilon", c.epsilon);
    take(s, "quad_tol", c.quad_tol);
  }
  if (j.contains("output")) {
    const auto& s = j["output"];
    check_keys(s, {"path", "format"}, "output");
    take(s, "path", c.output_path);
    take(s, "format", c.format);
  }
  if (j.contains("count")) {
    const auto& s = j["count"];
    check_keys(s, {"n_max", "d", "fidelity"}, "count");
    take(s, "n_max", c.count.n_max);
    take(s, "d", c.count.distances);
    take(s, "fidelity", c.count.fidelity_path);
  }
  if (j.contains("bound")) {
    const auto& s = j["bound"];
    check_keys(s, {"t", "d", "source", "threads"}, "bound");
    take(s, "t", c.bound.times);
    take(s, "d", c.bound.distances);
    take(s, "source", c.bound.source);
    take(s, "threads", c.bound.threads);
  }
  if (j.contains("velocity")) {
    const auto& s = j["velocity"];
    check_keys(s, {"d_min", "d_max", "n_max", "n_max_limit"}, "velocity");
    take(s, "d_min", c.velocity.d_min);
    take(s, "d_max", c.velocity.d_max);
    take(s, "n_max", c.velocity.n_max);
    take(s, "n_max_limit", c.velocity.n_max_limit);
  }
  if (j.contains("scan_dim")) {
    const auto& s = j["scan_dim"];
    check_keys(s, {"D"}, "scan_dim");
    take(s, "D", c.scan.dimensions);
  }
  if (j.contains("horizon")) {
    const auto& s = j["horizon"];
    check_keys(s, {"D_in", "alpha", "t_i", "t_f", "steps", "convention", "mode"}, "horizon");
    take(s, "D_in", c.horizon.D_in);
    take(s, "alpha", c.horizon.alpha);
    take(s, "t_i", c.horizon.t_i);
    take(s, "t_f", c.horizon.t_f);
    take(s, "steps", c.horizon.steps);
    take(s, "convention", c.horizon.convention);
    take(s, "mode", c.horizon.mode);
  }
}

inline Json output_header(const RunConfig& c) {
  return {{"schema_version", kSchemaVersion}, {"command", c.command}, {"config", to_json(c)}};
}

/// Writes either to the configured path or to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot open output file '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

inline void emit(const RunConfig& c, const Table& t, std::ostream& out, const char* default_format = "csv") {
  const std::string fmt = c.format.empty() ? default_format : c.format;
  Sink sink(c.output_path, out);
  if (fmt == "csv")
    write_csv(sink.stream(), t, output_header(c));
  else if (fmt == "json")
    sink.stream() << table_to_json(t, output_header(c)).dump(2) << '\n';
  else
    throw std::invalid_argument("unknown format '" + fmt + "'");
}

inline BoundOptions bound_options(const RunConfig& c) {
  BoundOptions o;
  o.rel_tol = c.rel_tol;
  return o;
}

inline int cmd_count(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.count.n_max < 0) throw std::invalid_argument("--nmax must be nonnegative");
  if (c.count.distances.empty()) throw std::invalid_argument("--d needs at least one distance");
  for (int d : c.count.distances)
    if (d < 0) throw std::invalid_argument("distances must be nonnegative");
  if (c.lattice.dimension != 2) throw std::invalid_argument("count supports the two-dimensional lattice only");
  if (c.lattice.boundary != Boundary::periodic) throw std::invalid_argument("count uses a periodic lattice");
  const int d_max = *std::max_element(c.count.distances.begin(), c.count.distances.end());
  DpWalkCounts dp(c.count.n_max, d_max, c.lattice.extent);
  auto report = compare_closed_form(dp, c.count.n_max, c.count.distances);

  Table t{{"n", "d", "dp_count", "closed_form", "match"}, {}};
  for (int d : c.count.distances) {
    for (int n = 0; n <= c.count.n_max; ++n) {
      const BigInt cf = count_walks_closed_form(n, d);
      const BigInt& oracle = dp.ref(n, d);
      t.rows.push_back({std::to_string(n), std::to_string(d), oracle.str(), cf.str(), cf == oracle ? "1" : "0"});
    }
  }
  emit(c, t, out);

  std::string fid = c.count.fidelity_path;
  if (fid.empty() && !c.output_path.empty()) fid = c.output_path + ".fidelity.json";
  if (!fid.empty()) {
    Json doc = fidelity_to_json(report);
    doc["config"] = to_json(c);
    Sink sink(fid, out);
    sink.stream() << doc.dump(2) << '\n';
  }
  if (!report.ok()) {
    err << "closed form disagrees with the walk-count oracle at " << report.mismatches.size() << " of "
        << report.compared << " entries" << (fid.empty() ? "" : "; see " + fid) << '\n';
    return kFidelity;
  }
  return kOk;
}

inline int cmd_bound(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.bound.times.empty() || c.bound.distances.empty()) throw std::invalid_argument("need --t and --d values");
  for (double t : c.bound.times)
    if (!(t >= 0)) throw std::invalid_argument("times must be nonnegative");
  for (int d : c.bound.distances)
    if (d < 0) throw std::invalid_argument("distances must be nonnegative");
  c.couplings.validate();
  const auto threads = static_cast<unsigned>(std::max(1, c.bound.threads));
  std::vector<BoundSeriesResult> rows;
  if (c.bound.source == "dp") {
    const int d_max = *std::max_element(c.bound.distances.begin(), c.bound.distances.end());
    for (int n_max = 256;; n_max *= 2) {
      try {
        DpWalkCounts dp(n_max, d_max);
        rows = evaluate_grid(c.bound.times, c.bound.distances, c.couplings, dp, bound_options(c), threads);
        break;
      } catch (const CountSourceExhausted&) {
        if (n_max >= 2048) throw;
      }
    }
  } else if (c.bound.source == "closed_form") {
    ClosedFormWalkCounts cf;
    rows = evaluate_grid(c.bound.times, c.bound.distances, c.couplings, cf, bound_options(c), threads);
  } else {
    throw std::invalid_argument("unknown count source '" + c.bound.source + "'");
  }
  Table t{{"t", "d", "value", "n_truncate", "tail_estimate"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({format_double(r.t), std::to_string(r.d), format_double(r.value), std::to_string(r.n_truncate),
                      format_double(r.tail_estimate)});
  emit(c, t, out);
  return kOk;
}

/// Runs the velocity pipeline on DP counts, doubling the count range until
/// the series converge or n_max_limit is reached.
inline VelocityReport run_velocity(const RunConfig& c) {
  VelocityConfig vc;
  vc.couplings = c.couplings;
  vc.epsilon = c.epsilon;
  vc.d_min = c.velocity.d_min;
  vc.d_max = c.velocity.d_max;
  vc.arrival.bound.rel_tol = std::min(c.rel_tol, 1e-12);
  vc.validate();
  if (c.velocity.n_max < 1 || c.velocity.n_max_limit < c.velocity.n_max)
    throw std::invalid_argument("need 1 <= velocity n_max <= n_max_limit");
  for (int n_max = c.velocity.n_max;; n_max = std::min(2 * n_max, c.velocity.n_max_limit)) {
    try {
      DpWalkCounts dp(n_max, vc.d_max);
      return measure_velocity(vc, dp);
    } catch (const CountSourceExhausted&) {
      if (n_max >= c.velocity.n_max_limit) throw;
    }
  }
}

inline int cmd_velocity(const RunConfig& c, std::ostream& out, std::ostream&) {
  auto rep = run_velocity(c);
  const std::string fmt = c.format.empty() ? "json" : c.format;
  if (fmt == "json") {
    Json doc = output_header(c);
    const Json body = velocity_report_to_json(rep);
    for (const auto& [k, v] : body.items()) doc[k] = v;
    Sink sink(c.output_path, out);
    sink.stream() << doc.dump(2) << '\n';
    return kOk;
  }
  Table t{{"d", "t_arrival"}, {}};
  for (const auto& a : rep.arrivals) t.rows.push_back({std::to_string(a.d), format_double(a.t)});
  emit(c, t, out);
  return kOk;
}

inline int cmd_scan_dim(const RunConfig& c, std::ostream& out, std::ostream&) {
  c.couplings.validate();
  if (c.scan.dimensions.empty()) throw std::invalid_argument("need at least one dimension");
  Table t{{"D", "b_paper", "b_graph", "v_paper", "v_graph", "v_paper_over_D", "ratio_paper_over_graph"}, {}};
  for (double D : c.scan.dimensions) {
    const double vp = v_lr_dimension(D, c.couplings, Branching::paper);
    const double vg = v_lr_dimension(D, c.couplings, Branching::graph);
    t.rows.push_back({format_double(D), format_double(branching_factor(D, Branching::paper)),
                      format_double(branching_factor(D, Branching::graph)), format_double(vp), format_double(vg),
                      format_double(vp / D), format_double(vp / vg)});
  }
  emit(c, t, out);
  return kOk;
}

inline int cmd_horizon(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto& h = c.horizon;
  std::vector<Branching> conventions;
  if (h.convention == "both")
    conventions = {Branching::paper, Branching::graph};
  else
    conventions = {parse_branching(h.convention)};
  Table t{{"t"}, {}};
  std::vector<std::vector<std::pair<double, double>>> columns;
  for (auto b : conventions) {
    HorizonModel m{h.D_in, h.alpha, c.couplings, b, parse_dimension_mode(h.mode)};
    columns.push_back(lightcone_boundary(m, h.t_i, h.t_f, h.steps, c.quad_tol));
    t.columns.push_back(std::string("r_") + to_string(b));
  }
  for (int k = 0; k < h.steps; ++k) {
    std::vector<std::string> row{format_double(columns[0][k].first)};
    for (const auto& col : columns) row.push_back(format_double(col[k].second));
    t.rows.push_back(std::move(row));
  }
  emit(c, t, out);
  return kOk;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    int v = std::stoi(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad integer '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Lieb-Robinson light cones of the emergent U(1) rotor model", "lrcone"};
  app.require_subcommand(1);

  std::optional<std::string> config_path, out_path, format;
  std::optional<double> g, J, norm_p, norm_q, step_factor, rel_tol, epsilon;
  std::optional<int> extent;
  std::optional<std::string> boundary;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    sub->add_option("--out,-o", out_path, "Output file (default stdout)");
    sub->add_option("--format", format, "csv or json");
    sub->add_option("--g", g, "Plaquette coupling g");
    sub->add_option("--J", J, "Link coupling J");
    sub->add_option("--norm-p", norm_p, "Norm of O_P");
    sub->add_option("--norm-q", norm_q, "Norm of O_Q");
    sub->add_option("--step-factor", step_factor, "Per-order factor on |t| (default sqrt 2)");
    sub->add_option("--rel-tol", rel_tol, "Relative tolerance of the bound series");
  };

  std::optional<int> nmax, nmax_limit, dmin, dmax, steps, threads;
  std::optional<std::string> d_list, t_list, source, fidelity, D_list, convention, mode;
  std::optional<double> D_in, alpha, t_i, t_f;

  auto* count = app.add_subcommand("count", "Walk counts: DP oracle against the closed form");
  common(count);
  count->add_option("--nmax", nmax, "Largest walk length");
  count->add_option("--d", d_list, "Comma-separated lattice distances");
  count->add_option("--extent", extent, "Periodic lattice extent (default: smallest guarded)");
  count->add_option("--boundary", boundary, "Lattice boundary (periodic)");
  count->add_option("--fidelity", fidelity, "Fidelity report path");

  auto* bound = app.add_subcommand("bound", "Bound B(t, d) over a grid");
  common(bound);
  bound->add_option("--t", t_list, "Comma-separated times");
  bound->add_option("--d", d_list, "Comma-separated distances");
  bound->add_option("--source", source, "dp or closed_form");
  bound->add_option("--threads", threads, "Worker threads");

  auto* velocity = app.add_subcommand("velocity", "Fit the light-cone velocity");
  common(velocity);
  velocity->add_option("--eps", epsilon, "Arrival threshold epsilon");
  velocity->add_option("--dmin", dmin, "Smallest distance of the fit window");
  velocity->add_option("--dmax", dmax, "Largest distance of the fit window");
  velocity->add_option("--nmax", nmax, "Initial walk-count range");
  velocity->add_option("--nmax-limit", nmax_limit, "Largest walk-count range to try");

  auto* scan = app.add_subcommand("scan-dim", "Velocity against dimension for both branching conventions");
  common(scan);
  scan->add_option("--D", D_list, "Comma-separated dimensions");

  auto* horizon = app.add_subcommand("horizon", "Light-cone boundary of the shrinking-dimension model");
  common(horizon);
  horizon->add_option("--Din", D_in, "Initial dimension");
  horizon->add_option("--alpha", alpha, "Dimension decay rate");
  horizon->add_option("--ti", t_i, "Start time");
  horizon->add_option("--tf", t_f, "End time");
  horizon->add_option("--steps", steps, "Number of samples");
  horizon->add_option("--convention", convention, "paper, graph or both");
  horizon->add_option("--mode", mode, "strict or toy");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  RunConfig c;
  try {
    c.command = app.get_subcommands().front()->get_name();
    if (config_path) {
      std::ifstream f(*config_path);
      if (!f) throw std::invalid_argument("cannot read config '" + *config_path + "'");
      apply_json(c, Json::parse(f));
      c.command = app.get_subcommands().front()->get_name();
    }
    if (out_path) c.output_path = *out_path;
    if (format) c.format = *format;
    if (g) c.couplings.g = *g;
    if (J) c.couplings.J = *J;
    if (norm_p) c.couplings.norm_p = *norm_p;
    if (norm_q) c.couplings.norm_q = *norm_q;
    if (step_factor) c.couplings.step_factor = *step_factor;
    if (rel_tol) c.rel_tol = *rel_tol;
    if (epsilon) c.epsilon = *epsilon;
    if (extent) c.lattice.extent = *extent;
    if (boundary) c.lattice.boundary = parse_boundary(*boundary);
    c.couplings.validate();

    if (c.command == "count") {
      if (nmax) c.count.n_max = *nmax;
      if (d_list) c.count.distances = parse_int_list(*d_list);
      if (fidelity) c.count.fidelity_path = *fidelity;
      return cmd_count(c, out, err);
    }
    if (c.command == "bound") {
      if (t_list) c.bound.times = parse_double_list(*t_list);
      if (d_list) c.bound.distances = parse_int_list(*d_list);
      if (source) c.bound.source = *source;
      if (threads) c.bound.threads = *threads;
      return cmd_bound(c, out, err);
    }
    if (c.command == "velocity") {
      if (dmin) c.velocity.d_min = *dmin;
      if (dmax) c.velocity.d_max = *dmax;
      if (nmax) c.velocity.n_max = *nmax;
      if (nmax_limit) c.velocity.n_max_limit = *nmax_limit;
      return cmd_velocity(c, out, err);
    }
    if (c.command == "scan-dim") {
      if (D_list) c.scan.dimensions = parse_double_list(*D_list);
      return cmd_scan_dim(c, out, err);
    }
    if (D_in) c.horizon.D_in = *D_in;
    if (alpha) c.horizon.alpha = *alpha;
    if (t_i) c.horizon.t_i = *t_i;
    if (t_f) c.horizon.t_f = *t_f;
    if (steps) c.horizon.steps = *steps;
    if (convention) c.horizon.convention = *convention;
    if (mode) c.horizon.mode = *mode;
    return cmd_horizon(c, out, err);
  } catch (const CountSourceExhausted& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const SeriesDidNotConverge& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const ThresholdUnreachable& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad config: " << e.what() << '\n';
    return kUsage;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error, out_of_range, length_error
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace lrcone::cli

#endif  // LRCONE_CLI_HPP
