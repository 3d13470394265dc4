#include "wnlab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace wnlab {

json num(double x)
{
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (std::isnan(x))
    return "nan";
  return x;
}

double num_from(const json& j)
{
  if (j.is_number())
    return j.get<double>();
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf" || s == "Infinity")
      return std::numeric_limits<double>::infinity();
    if (s == "-inf")
      return -std::numeric_limits<double>::infinity();
  }
  throw std::invalid_argument("expected a number or \"inf\"");
}

namespace {

json nums(const std::vector<double>& v)
{
  json a = json::array();
  for (double x : v)
    a.push_back(num(x));
  return a;
}

} // namespace

json to_json(const ProductKernel& K)
{
  return { { "profile", to_string(K.scalar.profile()) },
           { "ell", K.scalar.order() },
           { "d", K.dim },
           { "a", K.scalar.support_radius() },
           { "A", K.scalar.lipschitz() } };
}

json to_json(const BandwidthField& h)
{
  json cells = json::array();
  const int d = h.grid().dim();
  for (std::size_t c = 0; c < h.cell_levels().size(); ++c) {
    if (h.partition().measure_in_domain(c) <= 0.0)
      continue;
    const auto& lv = h.cell_levels()[c];
    cells.push_back({ { "index", c }, { "levels", std::vector<int>(lv.begin(), lv.begin() + d) } });
  }
  return { { "partition_level", h.partition_level() }, { "cells", cells } };
}

BandwidthField bandwidth_field_from_json(const Grid& grid, const json& j)
{
  const int level = j.at("partition_level").get<int>();
  DyadicPartition part(level, grid.dim(), grid.half_width());
  std::vector<Levels> cells(part.cell_count(), Levels{ 0, 0, 0 });
  for (const auto& c : j.at("cells")) {
    auto idx = c.at("index").get<std::size_t>();
    if (idx >= cells.size())
      throw std::invalid_argument("cell index out of range");
    auto lv = c.at("levels").get<std::vector<int>>();
    if (static_cast<int>(lv.size()) != grid.dim())
      throw std::invalid_argument("cell level tuple has the wrong length");
    for (int k = 0; k < grid.dim(); ++k)
      cells[idx][k] = lv[k];
  }
  return BandwidthField(grid, level, std::move(cells));
}

json to_json(const ClassSpec& theta)
{
  return { { "beta", nums(theta.beta) }, { "r", nums(theta.r) }, { "L", nums(theta.L) } };
}

ClassSpec class_spec_from_json(const json& j)
{
  auto vec = [&](const char* key) {
    std::vector<double> v;
    for (const auto& x : j.at(key))
      v.push_back(num_from(x));
    return v;
  };
  return ClassSpec(vec("beta"), vec("r"), vec("L"));
}

json to_json(const RateProfile& pr)
{
  return { { "p", num(pr.p) },
           { "zone", to_string(pr.zone) },
           { "a", num(pr.a) },
           { "beta", num(pr.beta) },
           { "omega", num(pr.omega) },
           { "L_beta", num(pr.L_beta) },
           { "p_star", num(pr.p_star) },
           { "gamma", num(pr.gamma) },
           { "upsilon", num(pr.upsilon) },
           { "L_gamma", num(pr.L_gamma) },
           { "tau_2", num(tau(pr, 2.0)) },
           { "tau_p_star", num(tau(pr, pr.p_star)) },
           { "kappa_p", num(kappa(pr, pr.p)) },
           { "consistent", pr.consistent },
           { "boundary_kappa_zero", pr.boundary_kappa_zero },
           { "boundary_rj_one", pr.boundary_rj_one } };
}

json to_json(const SelectionResult& s)
{
  return { { "chosen_index", s.chosen_index },
           { "rhat", nums(s.rhat) },
           { "penalty", nums(s.penalty) },
           { "objective", nums(s.objective) } };
}

json to_json(const MembershipReport& m)
{
  return { { "norms", nums(m.norms) },
           { "radii", nums(m.radii) },
           { "worst_ratio", nums(m.worst_ratio) },
           { "worst_u", nums(m.worst_u) },
           { "slack", m.slack },
           { "pass", m.pass } };
}

json to_json(const VgCertificate& c)
{
  return { { "m", c.m },
           { "n", c.n },
           { "size", c.size },
           { "bound", c.bound },
           { "min_distance", c.min_distance },
           { "weights_ok", c.weights_ok },
           { "distance_ok", c.distance_ok },
           { "cardinality_ok", c.cardinality_ok },
           { "ratio_ok", c.ratio_ok },
           { "restarts_used", c.restarts_used } };
}

json to_json(const BumpFamily& fam)
{
  json words = json::array();
  for (const auto& w : fam.W)
    words.push_back(w.bits());
  json cal = json::object();
  for (const auto& [k, v] : fam.calibrated)
    cal[k] = v;
  return { { "theta", to_json(fam.theta) },
           { "p", num(fam.p) },
           { "eps", fam.eps },
           { "b", fam.b },
           { "zone", to_string(fam.zone) },
           { "A", fam.A },
           { "m", fam.m },
           { "sigma", nums(fam.sigma) },
           { "M", fam.M },
           { "cells", fam.cells },
           { "rho", fam.rho },
           { "varpi", num(fam.varpi) },
           { "constants", { { "C1", fam.constants.C1 }, { "C2", fam.constants.C2 }, { "C3", fam.constants.C3 } } },
           { "calibrated", cal },
           { "conditions",
             { { "likelihood", fam.cond_likelihood },
               { "membership", fam.cond_membership },
               { "log_cardinality", fam.cond_log_card } } },
           { "certificate", to_json(fam.certificate) },
           { "W", words } };
}

json to_json(const UpperFunctionReport& r)
{
  return { { "moment", r.moment },
           { "stderr", r.stderr_ },
           { "bound", r.bound },
           { "ratio", r.ratio },
           { "reps", r.reps } };
}

json to_json(const RiskReport& r)
{
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({ { "eps", row.eps },
                     { "risk", row.risk },
                     { "stderr", row.stderr_ },
                     { "reps", row.reps },
                     { "oracle", row.oracle },
                     { "ratio", row.ratio } });
  json out = { { "signal", r.signal },
               { "p", num(r.p) },
               { "q", r.q },
               { "H", r.H_descriptor },
               { "kernel", r.kernel_descriptor },
               { "seed", r.seed },
               { "rows", rows } };
  if (r.fit)
    out["slope"] = { { "fitted", r.fit->slope },
                     { "halfwidth", r.fit->halfwidth },
                     { "theoretical", r.theoretical },
                     { "branch", r.branch } };
  return out;
}

std::string fnv1a_hex(const std::string& bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace wnlab
