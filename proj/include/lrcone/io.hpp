#ifndef LRCONE_IO_HPP
#define LRCONE_IO_HPP

#include <charconv>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lrcone/cosmo.hpp"
#include "lrcone/lattice.hpp"
#include "lrcone/pathcount.hpp"
#include "lrcone/velocity.hpp"

namespace lrcone {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline Json to_json(const LatticeSpec& s) {
  return {{"dimension", s.dimension}, {"extent", s.extent}, {"boundary", to_string(s.boundary)}};
}

inline Json to_json(const Couplings& c) {
  return {{"g", c.g}, {"J", c.J}, {"norm_P", c.norm_p}, {"norm_Q", c.norm_q}, {"step_factor", c.step_factor}};
}

inline Json lattice_to_json(const DecoratedLattice& g) {
  Json links = Json::array(), plaqs = Json::array(), adj = Json::array();
  for (VertexId v = 0; v < g.num_links(); ++v) links.push_back(g.link_key(v).doubled_midpoint);
  for (VertexId v = static_cast<VertexId>(g.num_links()); v < g.num_vertices(); ++v) {
    auto k = g.plaquette_key(v);
    plaqs.push_back({{"corner", k.corner}, {"axes", {k.axis_a, k.axis_b}}});
  }
  for (auto [l, p] : g.edge_list()) adj.push_back({l, p});
  return {{"schema_version", kSchemaVersion},
          {"spec", to_json(g.spec())},
          {"link_vertices", std::move(links)},
          {"plaquette_vertices", std::move(plaqs)},
          {"adjacency", std::move(adj)}};
}

inline Json fidelity_to_json(const FidelityReport& r) {
  Json mm = Json::array();
  for (const auto& m : r.mismatches)
    mm.push_back({{"n", m.n}, {"d", m.d}, {"closed_form", m.closed_form.str()}, {"oracle", m.oracle.str()}});
  return {{"schema_version", kSchemaVersion},
          {"n_max", r.n_max},
          {"distances", r.distances},
          {"compared", r.compared},
          {"mismatch_count", r.mismatches.size()},
          {"mismatches", std::move(mm)}};
}

inline Json velocity_report_to_json(const VelocityReport& r) {
  Json arrivals = Json::array();
  for (const auto& a : r.arrivals) arrivals.push_back({a.d, a.t});
  Json trend = Json::array();
  for (const auto& w : r.trend) trend.push_back({{"d_min", w.d_lo}, {"d_max", w.d_hi}, {"v", w.v}});
  return {{"couplings", to_json(r.config.couplings)},
          {"epsilon", r.config.epsilon},
          {"arrivals", std::move(arrivals)},
          {"fit",
           {{"A", r.fit.A},
            {"xi", r.fit.xi},
            {"v", r.fit.v},
            {"residual_rms", r.fit.residual_rms},
            {"window", {{"d_min", r.fit.window.d_min}, {"d_max", r.fit.window.d_max}, {"epsilon", r.fit.window.epsilon}}}}},
          {"kappa", {{"kappa_star", r.kappa.kappa_star}, {"objective_min", r.kappa.objective_min}, {"v_lr", r.kappa.v_lr}}},
          {"light_speed", r.config.couplings.light_speed()},
          {"ratio_v_over_c", r.ratio_v_over_c},
          {"ratio_v_over_v_lr", r.ratio_v_over_vlr},
          {"trend", std::move(trend)}};
}

/// A rectangular table of preformatted cells, emitted as CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// CSV with a leading comment line carrying the schema version and the
/// configuration echo.
inline void write_csv(std::ostream& os, const Table& t, const Json& header) {
  os << "# " << header.dump() << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

/// JSON document {header..., "rows": [{col: cell}]}; cells stay strings so big
/// integers survive.
inline Json table_to_json(const Table& t, Json header) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json o = Json::object();
    for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = r[i];
    rows.push_back(std::move(o));
  }
  header["columns"] = t.columns;
  header["rows"] = std::move(rows);
  return header;
}

/// Parse a CSV written by write_csv. Returns the header JSON and the table.
inline std::pair<Json, Table> read_csv(std::istream& is) {
  std::string line;
  Json header;
  Table t;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(is, line)) {
    if (line.rfind("# ", 0) == 0) {
      header = Json::parse(line.substr(2));
    } else if (t.columns.empty()) {
      t.columns = split(line);
    } else if (!line.empty()) {
      t.rows.push_back(split(line));
    }
  }
  return {std::move(header), std::move(t)};
}

}  // namespace lrcone

#endif  // LRCONE_IO_HPP
