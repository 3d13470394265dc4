#include "wnlab/experiment.hpp"
#include "wnlab/errors.hpp"
#include "wnlab/estimator.hpp"
#include "wnlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace wnlab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kinds = { "rates_table", "risk_curve",   "oracle_check", "upper_function_check",
                                         "testbed_export", "membership_check" };

// Fills defaults into a copy of the raw config and records which fields defaulted.
class Resolver
{
public:
  explicit Resolver(const json& raw)
    : raw_(raw)
  {
    if (!raw.is_object())
      throw ValidationError("$", "config must be a JSON object");
  }

  ExperimentConfig run();

private:
  const json& raw_;
  json out_;
  std::vector<std::string> defaulted_;

  const json* find(const json& obj, const std::string& key) const
  {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  double number(const json& v, const std::string& path, bool allow_inf = false) const
  {
    double x;
    try {
      x = num_from(v);
    } catch (const std::exception&) {
      throw ValidationError(path, "expected a number");
    }
    if (std::isnan(x) || (!allow_inf && std::isinf(x)))
      throw ValidationError(path, "expected a finite number");
    return x;
  }

  std::int64_t integer(const json& v, const std::string& path) const
  {
    if (!v.is_number_integer())
      throw ValidationError(path, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::vector<double> numbers(const json& v, const std::string& path, bool allow_inf = false) const
  {
    if (!v.is_array() || v.empty())
      throw ValidationError(path, "expected a nonempty array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(number(v[i], path + "[" + std::to_string(i) + "]", allow_inf));
    return out;
  }

  json& defaulted(json& obj, const std::string& key, const std::string& path, json value)
  {
    defaulted_.push_back(path);
    obj[key] = std::move(value);
    return obj[key];
  }

  ClassSpec read_class(const json& v, const std::string& path) const
  {
    if (!v.is_object())
      throw ValidationError(path, "expected an object with beta, r, L");
    for (const char* k : { "beta", "r", "L" })
      if (!find(v, k))
        throw ValidationError(path + "." + k, "required");
    auto beta = numbers(v.at("beta"), path + ".beta");
    auto r = numbers(v.at("r"), path + ".r", true);
    auto L = numbers(v.at("L"), path + ".L");
    try {
      return ClassSpec(beta, r, L);
    } catch (const std::exception& e) {
      throw ValidationError(path, e.what());
    }
  }

  void resolve_constants();
};

ExperimentConfig Resolver::run()
{
  // kind
  const json* kind = find(raw_, "kind");
  if (!kind)
    throw ValidationError("$.kind", "required");
  if (!kind->is_string() || std::find(kinds.begin(), kinds.end(), kind->get<std::string>()) == kinds.end())
    throw ValidationError("$.kind", "must be one of rates_table, risk_curve, oracle_check, upper_function_check, "
                                    "testbed_export, membership_check");
  const std::string k = kind->get<std::string>();
  out_["kind"] = k;

  for (auto it = raw_.begin(); it != raw_.end(); ++it) {
    static const std::set<std::string> known = { "kind",   "seed",   "threads", "grid",   "class",     "classes",
                                                 "p",      "q",      "kernel",  "eps",    "H",         "method",
                                                 "reps",   "signal", "caps",    "constants", "bootstrap", "word",
                                                 "fixed_levels", "comment" };
    if (!known.count(it.key()))
      throw ValidationError("$." + it.key(), "unknown field");
  }

  if (auto* s = find(raw_, "seed")) {
    if (!s->is_number_integer() || s->get<long long>() < 0)
      throw ValidationError("$.seed", "expected a nonnegative integer");
    out_["seed"] = *s;
  } else
    defaulted(out_, "seed", "$.seed", 1);
  if (auto* t = find(raw_, "threads")) {
    if (!t->is_number_integer() || t->get<long long>() < 0)
      throw ValidationError("$.threads", "expected a nonnegative integer");
    out_["threads"] = *t;
  } else
    defaulted(out_, "threads", "$.threads", 0);

  // classes
  std::optional<ClassSpec> theta;
  if (k == "rates_table") {
    const json* cs = find(raw_, "classes");
    if (!cs)
      throw ValidationError("$.classes", "required for kind rates_table");
    if (!cs->is_array() || cs->empty())
      throw ValidationError("$.classes", "expected a nonempty array of classes");
    json arr = json::array();
    for (std::size_t i = 0; i < cs->size(); ++i)
      arr.push_back(to_json(read_class((*cs)[i], "$.classes[" + std::to_string(i) + "]")));
    out_["classes"] = arr;
  }
  if (auto* c = find(raw_, "class")) {
    theta = read_class(*c, "$.class");
    out_["class"] = to_json(*theta);
  } else if (k == "testbed_export" || k == "membership_check") {
    throw ValidationError("$.class", "required for kind " + k);
  }

  // norms
  if (auto* p = find(raw_, "p")) {
    if (k == "rates_table" && p->is_array()) {
      auto ps = numbers(*p, "$.p", true);
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (!(ps[i] >= 1.0))
          throw ValidationError("$.p[" + std::to_string(i) + "]", "must be >= 1");
      json arr = json::array();
      for (double x : ps)
        arr.push_back(num(x));
      out_["p"] = arr;
    } else {
      double pv = number(*p, "$.p", true);
      if (!(pv >= 1.0))
        throw ValidationError("$.p", "must be >= 1");
      out_["p"] = num(pv);
    }
  } else {
    double pv = 2.0;
    if (theta && std::adjacent_find(theta->r.begin(), theta->r.end(), std::not_equal_to<>()) == theta->r.end())
      pv = theta->r[0];
    defaulted(out_, "p", "$.p", num(pv));
  }
  if (auto* q = find(raw_, "q")) {
    double qv = number(*q, "$.q");
    if (!(qv >= 1.0))
      throw ValidationError("$.q", "must be >= 1");
    out_["q"] = qv;
  } else
    defaulted(out_, "q", "$.q", 2.0);

  if (k == "rates_table") {
    resolve_constants();
    return { out_, defaulted_ };
  }

  // grid
  json grid = json::object();
  const json* g = find(raw_, "grid");
  if (g && !g->is_object())
    throw ValidationError("$.grid", "expected an object");
  const json empty = json::object();
  const json& graw = g ? *g : empty;
  int d = theta ? theta->dim() : 1;
  if (auto* v = find(graw, "d")) {
    d = static_cast<int>(integer(*v, "$.grid.d"));
    if (d < 1 || d > 3)
      throw ValidationError("$.grid.d", "must be 1, 2 or 3");
    grid["d"] = d;
  } else
    defaulted(grid, "d", "$.grid.d", d);
  if (theta && theta->dim() != d)
    throw ValidationError("$.grid.d", "differs from the class dimension");
  if (auto* v = find(graw, "b")) {
    double b = number(*v, "$.grid.b");
    if (!(b > 0.0))
      throw ValidationError("$.grid.b", "must be positive");
    grid["b"] = b;
  } else
    defaulted(grid, "b", "$.grid.b", 1.0);
  if (auto* v = find(graw, "n")) {
    auto n = integer(*v, "$.grid.n");
    if (n < 4 || (n & (n - 1)) != 0)
      throw ValidationError("$.grid.n", "must be a power of two >= 4");
    grid["n"] = n;
  } else
    defaulted(grid, "n", "$.grid.n", 256);
  out_["grid"] = grid;

  // kernel
  json kernel = json::object();
  const json* kr = find(raw_, "kernel");
  if (kr && !kr->is_object())
    throw ValidationError("$.kernel", "expected an object");
  const json& kraw = kr ? *kr : empty;
  if (auto* v = find(kraw, "profile")) {
    if (!v->is_string())
      throw ValidationError("$.kernel.profile", "expected a string");
    try {
      auto prof = profile_from_string(v->get<std::string>());
      if (prof == KernelProfile::custom)
        throw std::invalid_argument("custom kernels are not available from configs");
    } catch (const std::exception& e) {
      throw ValidationError("$.kernel.profile", e.what());
    }
    kernel["profile"] = *v;
  } else
    defaulted(kernel, "profile", "$.kernel.profile", "cosine_bump");
  if (auto* v = find(kraw, "ell")) {
    auto ell = integer(*v, "$.kernel.ell");
    if (ell < 1 || ell > 8)
      throw ValidationError("$.kernel.ell", "must lie in 1..8");
    kernel["ell"] = ell;
  } else {
    int ell = 2;
    if (theta)
      ell = static_cast<int>(std::floor(*std::max_element(theta->beta.begin(), theta->beta.end()))) + 1;
    defaulted(kernel, "ell", "$.kernel.ell", ell);
  }
  out_["kernel"] = kernel;

  // eps
  const bool needs_eps = k != "membership_check";
  if (auto* e = find(raw_, "eps")) {
    auto es = numbers(*e, "$.eps");
    for (std::size_t i = 0; i < es.size(); ++i)
      if (!(es[i] > 0.0 && es[i] < 1.0))
        throw ValidationError("$.eps[" + std::to_string(i) + "]", "must lie in (0,1)");
    out_["eps"] = es;
  } else if (needs_eps) {
    throw ValidationError("$.eps", "required for kind " + k);
  }

  // bandwidth family
  const bool uses_H = k == "risk_curve" || k == "oracle_check" || k == "upper_function_check";
  if (uses_H) {
    json H = json::object();
    const json* hr = find(raw_, "H");
    if (hr && !hr->is_object())
      throw ValidationError("$.H", "expected an object");
    const json& hraw = hr ? *hr : empty;
    std::string recipe = "const_lattice";
    if (auto* v = find(hraw, "recipe")) {
      if (!v->is_string())
        throw ValidationError("$.H.recipe", "expected a string");
      recipe = v->get<std::string>();
      if (recipe != "const_lattice" && recipe != "dyadic_varying" && recipe != "oracle_grid")
        throw ValidationError("$.H.recipe", "must be const_lattice, dyadic_varying or oracle_grid");
      H["recipe"] = recipe;
    } else
      defaulted(H, "recipe", "$.H.recipe", recipe);
    if (recipe == "const_lattice") {
      if (auto* v = find(hraw, "levels")) {
        if (!v->is_array() || v->empty())
          throw ValidationError("$.H.levels", "expected a nonempty array of level tuples");
        for (std::size_t i = 0; i < v->size(); ++i) {
          const auto& t = (*v)[i];
          std::string path = "$.H.levels[" + std::to_string(i) + "]";
          if (!t.is_array() || static_cast<int>(t.size()) != d)
            throw ValidationError(path, "expected " + std::to_string(d) + " levels");
          for (std::size_t j = 0; j < t.size(); ++j) {
            auto s = integer(t[j], path + "[" + std::to_string(j) + "]");
            if (s < 0 || s > max_level)
              throw ValidationError(path + "[" + std::to_string(j) + "]", "level out of range");
          }
        }
        H["levels"] = *v;
      } else {
        if (auto* v = find(hraw, "h_max")) {
          double hm = number(*v, "$.H.h_max");
          if (!(hm > 0.0))
            throw ValidationError("$.H.h_max", "must be positive");
          H["h_max"] = hm;
        } else
          defaulted(H, "h_max", "$.H.h_max", 1.0);
        if (auto* v = find(hraw, "v_min")) {
          double vm = number(*v, "$.H.v_min");
          if (!(vm >= 0.0))
            throw ValidationError("$.H.v_min", "must be nonnegative");
          H["v_min"] = vm;
        } else
          defaulted(H, "v_min", "$.H.v_min", 0.0);
      }
    } else if (recipe == "dyadic_varying") {
      if (k == "oracle_check" || k == "upper_function_check")
        throw ValidationError("$.H.recipe", "kind " + k + " needs constant bandwidths");
      for (const char* key : { "level", "count" })
        if (!find(hraw, key))
          throw ValidationError(std::string("$.H.") + key, "required for recipe dyadic_varying");
      auto level = integer(hraw.at("level"), "$.H.level");
      auto count = integer(hraw.at("count"), "$.H.count");
      if (level < 0 || level > 6)
        throw ValidationError("$.H.level", "must lie in 0..6");
      if (count < 1)
        throw ValidationError("$.H.count", "must be positive");
      H["level"] = level;
      H["count"] = count;
    } else {
      if (!theta)
        throw ValidationError("$.class", "required for recipe oracle_grid");
    }
    out_["H"] = H;

    if (k == "risk_curve") {
      std::string method = recipe == "dyadic_varying" ? "select_varying" : "select_const";
      if (auto* v = find(raw_, "method")) {
        if (!v->is_string())
          throw ValidationError("$.method", "expected a string");
        try {
          risk_method_from_string(v->get<std::string>());
        } catch (const std::exception& e) {
          throw ValidationError("$.method", e.what());
        }
        method = v->get<std::string>();
        out_["method"] = method;
      } else
        defaulted(out_, "method", "$.method", method);
      if (method == "select_const" && recipe == "dyadic_varying")
        throw ValidationError("$.method", "select_const needs constant bandwidths");
      if (method == "fixed_h") {
        const json* fl = find(raw_, "fixed_levels");
        if (!fl)
          throw ValidationError("$.fixed_levels", "required for method fixed_h");
        if (!fl->is_array() || static_cast<int>(fl->size()) != d)
          throw ValidationError("$.fixed_levels", "expected " + std::to_string(d) + " levels");
        for (std::size_t j = 0; j < fl->size(); ++j) {
          auto s = integer((*fl)[j], "$.fixed_levels[" + std::to_string(j) + "]");
          if (s < 0 || s > max_level)
            throw ValidationError("$.fixed_levels[" + std::to_string(j) + "]", "level out of range");
        }
        out_["fixed_levels"] = *fl;
      }
    }
  }

  // replications
  if (uses_H) {
    const int min_reps = k == "upper_function_check" ? 100 : 30;
    const int def_reps = k == "upper_function_check" ? 500 : (k == "oracle_check" ? 200 : 100);
    if (auto* v = find(raw_, "reps")) {
      auto r = integer(*v, "$.reps");
      if (r < min_reps)
        throw ValidationError("$.reps", "must be at least " + std::to_string(min_reps));
      out_["reps"] = r;
    } else
      defaulted(out_, "reps", "$.reps", def_reps);
    if (auto* v = find(raw_, "bootstrap")) {
      auto r = integer(*v, "$.bootstrap");
      if (r < 2)
        throw ValidationError("$.bootstrap", "must be at least 2");
      out_["bootstrap"] = r;
    } else
      defaulted(out_, "bootstrap", "$.bootstrap", 1000);
  }

  // signal
  if (k == "risk_curve" || k == "oracle_check" || k == "membership_check") {
    json sig = json::object();
    const json* sr = find(raw_, "signal");
    if (sr && !sr->is_object())
      throw ValidationError("$.signal", "expected an object");
    const json& sraw = sr ? *sr : empty;
    std::string skind = "lacunary";
    if (auto* v = find(sraw, "kind")) {
      if (!v->is_string())
        throw ValidationError("$.signal.kind", "expected a string");
      skind = v->get<std::string>();
      if (skind != "lacunary" && skind != "zero" && skind != "family_member")
        throw ValidationError("$.signal.kind", "must be lacunary, zero or family_member");
      sig["kind"] = skind;
    } else
      defaulted(sig, "kind", "$.signal.kind", skind);
    if (skind == "lacunary") {
      if (auto* v = find(sraw, "smoothness")) {
        auto sm = numbers(*v, "$.signal.smoothness");
        if (static_cast<int>(sm.size()) != d)
          throw ValidationError("$.signal.smoothness", "expected one value per axis");
        for (double x : sm)
          if (!(x > 0.0))
            throw ValidationError("$.signal.smoothness", "values must be positive");
        sig["smoothness"] = sm;
      } else {
        std::vector<double> sm = theta ? theta->beta : std::vector<double>(d, 2.0);
        defaulted(sig, "smoothness", "$.signal.smoothness", sm);
      }
      if (auto* v = find(sraw, "terms")) {
        auto t = integer(*v, "$.signal.terms");
        if (t < 0 || t > 30)
          throw ValidationError("$.signal.terms", "must lie in 0..30");
        sig["terms"] = t;
      } else
        defaulted(sig, "terms", "$.signal.terms", 0);
    }
    if (skind == "family_member") {
      if (!theta)
        throw ValidationError("$.class", "required for family_member signals");
      if (auto* v = find(sraw, "eps")) {
        double e = number(*v, "$.signal.eps");
        if (!(e > 0.0 && e < std::exp(-1.0)))
          throw ValidationError("$.signal.eps", "must lie in (0, 1/e)");
        sig["eps"] = e;
      } else
        throw ValidationError("$.signal.eps", "required for family_member signals");
      if (auto* v = find(sraw, "word")) {
        auto w = integer(*v, "$.signal.word");
        if (w < 0)
          throw ValidationError("$.signal.word", "must be nonnegative");
        sig["word"] = w;
      } else
        defaulted(sig, "word", "$.signal.word", 1);
    }
    if (auto* v = find(sraw, "amplitude")) {
      double a = number(*v, "$.signal.amplitude");
      if (!(a >= 0.0))
        throw ValidationError("$.signal.amplitude", "must be nonnegative");
      sig["amplitude"] = a;
    } else
      defaulted(sig, "amplitude", "$.signal.amplitude", 1.0);
    if (auto* v = find(sraw, "amplitude_log_spread")) {
      double a = number(*v, "$.signal.amplitude_log_spread");
      if (!(a >= 0.0))
        throw ValidationError("$.signal.amplitude_log_spread", "must be nonnegative");
      sig["amplitude_log_spread"] = a;
    } else
      defaulted(sig, "amplitude_log_spread", "$.signal.amplitude_log_spread", 0.0);
    out_["signal"] = sig;
  }

  // caps
  json caps = json::object();
  const json* cr = find(raw_, "caps");
  if (cr && !cr->is_object())
    throw ValidationError("$.caps", "expected an object");
  const json& craw = cr ? *cr : empty;
  for (auto [key, def] : { std::pair<const char*, int>{ "H", static_cast<int>(default_H_cap) },
                           { "oracle_grid", 10000 },
                           { "r", 64 } }) {
    std::string path = std::string("$.caps.") + key;
    if (auto* v = find(craw, key)) {
      auto c = integer(*v, path);
      if (c < 1)
        throw ValidationError(path, "must be positive");
      caps[key] = c;
    } else
      defaulted(caps, key, path, def);
  }
  out_["caps"] = caps;

  resolve_constants();
  return { out_, defaulted_ };
}

void Resolver::resolve_constants()
{
  json c = json::object();
  const json* cr = find(raw_, "constants");
  if (cr && !cr->is_object())
    throw ValidationError("$.constants", "expected an object");
  const json empty = json::object();
  const json& craw = cr ? *cr : empty;
  json table = json::object();
  if (auto* t = find(craw, "C2"); t && t->is_string()) {
    if (t->get<std::string>() != "kernel_scaled")
      throw ValidationError("$.constants.C2", "expected an object mapping r to C2(r) or \"kernel_scaled\"");
    c["C2"] = "kernel_scaled";
  } else if (t) {
    if (!t->is_object())
      throw ValidationError("$.constants.C2", "expected an object mapping r to C2(r) or \"kernel_scaled\"");
    for (auto it = t->begin(); it != t->end(); ++it) {
      std::string path = "$.constants.C2." + it.key();
      int r;
      try {
        std::size_t used = 0;
        r = std::stoi(it.key(), &used);
        if (used != it.key().size())
          throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ValidationError(path, "key must be an integer r");
      }
      if (r < 2)
        throw ValidationError(path, "r must be at least 2");
      double v = number(*it, path);
      if (!(v > 0.0))
        throw ValidationError(path, "C2(r) must be positive");
      table[it.key()] = v;
    }
    c["C2"] = table;
  } else
    defaulted(c, "C2", "$.constants.C2", table);
  if (auto* v = find(craw, "C1_scale")) {
    double s = number(*v, "$.constants.C1_scale");
    if (!(s >= 1.0))
      throw ValidationError("$.constants.C1_scale", "must be at least 1");
    c["C1_scale"] = s;
  } else
    defaulted(c, "C1_scale", "$.constants.C1_scale", 1.0);
  if (auto* v = find(craw, "membership_slack")) {
    double s = number(*v, "$.constants.membership_slack");
    if (!(s >= 0.0))
      throw ValidationError("$.constants.membership_slack", "must be nonnegative");
    c["membership_slack"] = s;
  } else
    defaulted(c, "membership_slack", "$.constants.membership_slack", 0.1);
  out_["constants"] = c;
}

// ---------------------------------------------------------------- helpers

std::string fmt(double x)
{
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join_list(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? ";" : "") + fmt(v[i]);
  return s;
}

double pnum(const json& j) { return num_from(j); }

Grid grid_of(const json& c)
{
  const auto& g = c.at("grid");
  return Grid(g.at("d").get<int>(), g.at("b").get<double>(), g.at("n").get<int>());
}

ProductKernel kernel_of(const json& c, int d)
{
  const auto& k = c.at("kernel");
  return make_kernel(profile_from_string(k.at("profile").get<std::string>()), k.at("ell").get<int>(), d);
}

UpperFunctionConfig upper_config_of(const json& c, const ProductKernel& K, const Grid& grid, double eps)
{
  auto cfg = make_upper_config(K, grid, pnum(c.at("p")), c.at("q").get<double>(), eps);
  const auto& cs = c.at("constants");
  cfg.C1 *= cs.at("C1_scale").get<double>();
  cfg.r_cap = c.at("caps").at("r").get<int>();
  if (cs.at("C2").is_string()) {
    if (std::isfinite(cfg.p))
      cfg.C2_table = kernel_scaled_C2(K, cfg.p, cfg.r_cap);
  }
  else
    for (auto it = cs.at("C2").begin(); it != cs.at("C2").end(); ++it)
      cfg.C2_table[std::stoi(it.key())] = it->get<double>();
  cfg.validate();
  return cfg;
}

std::vector<BandwidthField> family_of(const json& c, const Grid& grid, double eps, std::string& descriptor)
{
  const auto& H = c.at("H");
  const std::string recipe = H.at("recipe").get<std::string>();
  std::vector<BandwidthField> out;
  if (recipe == "const_lattice") {
    if (H.contains("levels")) {
      for (const auto& t : H.at("levels"))
        out.push_back(BandwidthField::constant(grid, t.get<std::vector<int>>()));
      descriptor = "const_lattice(explicit " + std::to_string(out.size()) + ")";
    } else {
      out = constant_lattice(grid, H.at("h_max").get<double>(), H.at("v_min").get<double>());
      descriptor = "const_lattice(h_max=" + fmt(H.at("h_max").get<double>()) +
                   ",v_min=" + fmt(H.at("v_min").get<double>()) + ")";
    }
  } else if (recipe == "dyadic_varying") {
    const int level = H.at("level").get<int>();
    const int count = H.at("count").get<int>();
    const int floor_level = resolvability_floor(grid);
    const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
    for (int i = 0; i < count; ++i)
      out.push_back(random_bandwidth_field(grid, level, floor_level, seed, 0x48000000ull + i));
    descriptor = "dyadic_varying(level=" + std::to_string(level) + ",count=" + std::to_string(count) + ")";
  } else {
    const ClassSpec theta = class_spec_from_json(c.at("class"));
    OracleGridOptions opts;
    opts.ell = c.at("kernel").at("ell").get<int>();
    opts.min_bandwidth = 2.0 * grid.step();
    opts.cap = c.at("caps").at("oracle_grid").get<int>();
    auto og = oracle_bandwidth_grid(theta, pnum(c.at("p")), eps, opts);
    const int floor_level = resolvability_floor(grid);
    for (const auto& v : og.vectors) {
      bool ok = true;
      for (int s : v.levels)
        ok = ok && s <= floor_level;
      if (ok)
        out.push_back(BandwidthField::constant(grid, v.levels));
    }
    descriptor = "oracle_grid(" + std::to_string(out.size()) + " resolvable of " + std::to_string(og.vectors.size()) + ")";
  }
  if (out.empty())
    throw InfeasibleError("the bandwidth family is empty on this grid");
  if (out.size() > c.at("caps").at("H").get<std::size_t>())
    throw InfeasibleError("the bandwidth family exceeds caps.H");
  return out;
}

GridFunction signal_of(const json& c, const Grid& grid, std::string& descriptor)
{
  const auto& s = c.at("signal");
  const std::string kind = s.at("kind").get<std::string>();
  const double amp = s.at("amplitude").get<double>();
  if (kind == "zero") {
    descriptor = "zero";
    return GridFunction(grid);
  }
  if (kind == "lacunary") {
    auto sm = s.at("smoothness").get<std::vector<double>>();
    descriptor = "lacunary(smoothness=" + join_list(sm) + ",amplitude=" + fmt(amp) + ")";
    return amp * lacunary_signal(grid, sm, s.at("terms").get<int>());
  }
  const ClassSpec theta = class_spec_from_json(c.at("class"));
  const double eps = s.at("eps").get<double>();
  auto consts = default_lower_bound_constants(theta, pnum(c.at("p")));
  auto fam = build_family(theta, pnum(c.at("p")), eps, consts, grid.half_width(), c.at("seed").get<std::uint64_t>());
  const auto w = s.at("word").get<std::size_t>();
  if (w >= fam.W.size())
    throw InfeasibleError("signal.word exceeds the family size " + std::to_string(fam.W.size()));
  descriptor = "family_member(eps=" + fmt(eps) + ",word=" + std::to_string(w) + ",amplitude=" + fmt(amp) + ")";
  return amp * render_family_member(fam, fam.W[w], grid);
}

// ---------------------------------------------------------------- kinds

void run_rates_table(const json& c, RunOutputs& out)
{
  std::vector<double> ps;
  if (c.at("p").is_array())
    for (const auto& p : c.at("p"))
      ps.push_back(pnum(p));
  else
    ps.push_back(pnum(c.at("p")));
  std::ostringstream csv;
  csv << "row,beta,r,L,p,zone,a,tau_2,tau_p_star,kappa_p\n";
  json rows = json::array();
  std::size_t row = 0;
  for (const auto& cj : c.at("classes")) {
    const ClassSpec theta = class_spec_from_json(cj);
    for (double p : ps) {
      auto pr = classify(theta, p);
      csv << row << ',' << join_list(theta.beta) << ',' << join_list(theta.r) << ',' << join_list(theta.L) << ','
          << fmt(p) << ',' << to_string(pr.zone) << ',' << fmt(pr.a) << ',' << fmt(tau(pr, 2.0)) << ','
          << fmt(tau(pr, pr.p_star)) << ',' << fmt(kappa(pr, p)) << '\n';
      rows.push_back(to_json(pr));
      rows.back()["theta"] = cj;
      ++row;
    }
  }
  out.csv = csv.str();
  out.results = { { "rows", rows } };
}

void run_risk_curve(const json& c, RunOutputs& out)
{
  const Grid grid = grid_of(c);
  const auto K = kernel_of(c, grid.dim());
  const double p = pnum(c.at("p")), q = c.at("q").get<double>();
  const auto eps = c.at("eps").get<std::vector<double>>();
  const int reps = c.at("reps").get<int>();
  const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  RiskReport report;
  const GridFunction f = signal_of(c, grid, report.signal);
  report.p = p;
  report.q = q;
  report.seed = seed;
  report.kernel_descriptor = to_json(K).dump();
  const RiskMethod method = risk_method_from_string(c.at("method").get<std::string>());
  json per_eps = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    RiskSetup setup;
    setup.method = method;
    setup.threads = c.at("threads").get<unsigned>();
    setup.bootstrap_resamples = c.at("bootstrap").get<int>();
    setup.amplitude_log_spread = c.at("signal").at("amplitude_log_spread").get<double>();
    setup.cap = c.at("caps").at("H").get<std::size_t>();
    setup.H = family_of(c, grid, eps[k], report.H_descriptor);
    setup.cfg = upper_config_of(c, K, grid, eps[k]);
    if (method == RiskMethod::fixed_h)
      setup.fixed = BandwidthField::constant(grid, c.at("fixed_levels").get<std::vector<int>>());
    // each eps gets its own block of noise streams
    const std::uint64_t eps_seed = seed + 0x9e3779b97f4a7c15ull * (k + 1);
    auto est = mc_risk(f, setup, K, p, q, eps[k], reps, eps_seed);
    const PenaltyKind kind = method == RiskMethod::select_varying ? PenaltyKind::general : PenaltyKind::constant;
    const auto oracle = oracle_benchmark(f, setup.H, p, eps[k], setup.cfg, K, kind);
    report.rows.push_back({ eps[k], est.risk, est.stderr_, reps, oracle.value, est.risk / oracle.value });
    json chosen = json::array();
    for (auto i : est.chosen)
      chosen.push_back(i);
    per_eps.push_back({ { "eps", eps[k] }, { "chosen", chosen }, { "oracle_argmin", oracle.argmin } });
  }
  if (c.contains("class")) {
    const ClassSpec theta = class_spec_from_json(c.at("class"));
    const auto pr = classify(theta, p);
    std::vector<double> x, y;
    for (const auto& r : report.rows) {
      x.push_back(rate_argument(pr.zone, r.eps));
      y.push_back(r.risk);
    }
    try {
      report.fit = rate_fit(x, y);
      report.theoretical = theoretical_slope(pr);
      report.branch = pr.zone == Zone::Dense ? "ln eps" : "ln(eps^2 |ln eps|)";
    } catch (const std::invalid_argument&) {
      // too few or too narrowly spread noise levels: no slope
    }
  }
  std::ostringstream csv;
  write_risk_csv(csv, report);
  out.csv = csv.str();
  out.results = to_json(report);
  out.results["selections"] = per_eps;
}

void run_oracle_check(const json& c, RunOutputs& out)
{
  const Grid grid = grid_of(c);
  const auto K = kernel_of(c, grid.dim());
  const double p = pnum(c.at("p")), q = c.at("q").get<double>();
  const auto eps = c.at("eps").get<std::vector<double>>();
  const int reps = c.at("reps").get<int>();
  const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  std::string sig, hdesc;
  const GridFunction f = signal_of(c, grid, sig);
  std::ostringstream csv;
  csv << "eps,reps,within,fraction,bound,max_loss,mean_loss\n";
  json rows = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    RiskSetup setup;
    setup.method = RiskMethod::select_const;
    setup.threads = c.at("threads").get<unsigned>();
    setup.bootstrap_resamples = c.at("bootstrap").get<int>();
    setup.cap = c.at("caps").at("H").get<std::size_t>();
    setup.H = family_of(c, grid, eps[k], hdesc);
    setup.cfg = upper_config_of(c, K, grid, eps[k]);
    const std::uint64_t eps_seed = seed + 0x9e3779b97f4a7c15ull * (k + 1);
    auto est = mc_risk(f, setup, K, p, q, eps[k], reps, eps_seed);
    auto bound = oracle_bound_const(f, setup.H, p, eps[k], setup.cfg, K);
    int within = 0;
    double mx = 0, mean = 0;
    for (double l : est.losses) {
      within += l <= bound.bound;
      mx = std::max(mx, l);
      mean += l / reps;
    }
    csv << fmt(eps[k]) << ',' << reps << ',' << within << ',' << fmt(static_cast<double>(within) / reps) << ','
        << fmt(bound.bound) << ',' << fmt(mx) << ',' << fmt(mean) << '\n';
    rows.push_back({ { "eps", eps[k] },
                     { "within", within },
                     { "bound", bound.bound },
                     { "min_term", bound.min_term },
                     { "slack", bound.slack },
                     { "argmin", bound.argmin } });
  }
  out.csv = csv.str();
  out.results = { { "signal", sig }, { "H", hdesc }, { "rows", rows } };
}

void run_upper_function(const json& c, RunOutputs& out)
{
  const Grid grid = grid_of(c);
  const auto K = kernel_of(c, grid.dim());
  const auto eps = c.at("eps").get<std::vector<double>>();
  const int reps = c.at("reps").get<int>();
  const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  std::string hdesc;
  std::ostringstream csv;
  csv << "eps,moment,stderr,bound,ratio\n";
  json rows = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    auto H = family_of(c, grid, eps[k], hdesc);
    auto cfg = upper_config_of(c, K, grid, eps[k]);
    const std::uint64_t eps_seed = seed + 0x9e3779b97f4a7c15ull * (k + 1);
    auto rep = upper_function_check(grid, H, eps[k], reps, cfg, K, eps_seed, c.at("threads").get<unsigned>());
    csv << fmt(eps[k]) << ',' << fmt(rep.moment) << ',' << fmt(rep.stderr_) << ',' << fmt(rep.bound) << ','
        << fmt(rep.ratio) << '\n';
    auto j = to_json(rep);
    j["eps"] = eps[k];
    j["C1"] = cfg.C1;
    j["C3"] = cfg.C3;
    rows.push_back(j);
  }
  out.csv = csv.str();
  out.results = { { "H", hdesc }, { "rows", rows } };
}

void run_testbed_export(const json& c, RunOutputs& out)
{
  const Grid grid = grid_of(c);
  const ClassSpec theta = class_spec_from_json(c.at("class"));
  const double p = pnum(c.at("p"));
  const auto eps = c.at("eps").get<std::vector<double>>();
  const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  const auto consts = default_lower_bound_constants(theta, p);
  std::ostringstream csv;
  csv << "eps,zone,A,m,cells,words,rho,varpi,likelihood,membership,log_cardinality,vg_ok\n";
  json fams = json::array();
  for (std::size_t k = 0; k < eps.size(); ++k) {
    auto fam = build_family(theta, p, eps[k], consts, grid.half_width(), seed);
    csv << fmt(eps[k]) << ',' << to_string(fam.zone) << ',' << fmt(fam.A) << ',' << fam.m << ',' << fam.cells << ','
        << fam.W.size() << ',' << fmt(fam.rho) << ',' << fmt(fam.varpi) << ',' << fam.cond_likelihood << ','
        << fam.cond_membership << ',' << fam.cond_log_card << ',' << fam.certificate.ok() << '\n';
    fams.push_back(to_json(fam));
    if (fam.W.size() > 1) {
      std::ostringstream member;
      write_csv(member, render_family_member(fam, fam.W[1], grid));
      out.extra.emplace_back("member_eps" + std::to_string(k) + ".csv", member.str());
    }
  }
  out.csv = csv.str();
  out.results = { { "families", fams } };
}

void run_membership(const json& c, RunOutputs& out)
{
  const Grid grid = grid_of(c);
  const ClassSpec theta = class_spec_from_json(c.at("class"));
  std::string sig;
  const GridFunction f = signal_of(c, grid, sig);
  auto rep = check_membership(f, theta, default_u_grid(grid), c.at("constants").at("membership_slack").get<double>());
  std::ostringstream csv;
  csv << "axis,norm,radius,worst_ratio,worst_u,pass\n";
  for (int j = 0; j < theta.dim(); ++j)
    csv << j << ',' << fmt(rep.norms[j]) << ',' << fmt(rep.radii[j]) << ',' << fmt(rep.worst_ratio[j]) << ','
        << fmt(rep.worst_u[j]) << ',' << rep.pass << '\n';
  out.csv = csv.str();
  out.results = to_json(rep);
  out.results["signal"] = sig;
}

} // namespace

ExperimentConfig resolve_config(const json& raw)
{
  return Resolver(raw).run();
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
  std::ifstream in(file);
  if (!in)
    throw ValidationError("$", "cannot open config file " + file.string());
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("invalid JSON: ") + e.what());
  }
  return resolve_config(raw);
}

RunOutputs run_experiment(const ExperimentConfig& cfg)
{
  RunOutputs out;
  out.manifest = { { "tool", "wnlab" },
                   { "version", "1.0.0" },
                   { "config", cfg.resolved },
                   { "defaulted", cfg.defaulted },
                   { "seed", cfg.resolved.at("seed") } };
  const json& c = cfg.resolved;
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "rates_table")
    run_rates_table(c, out);
  else if (kind == "risk_curve")
    run_risk_curve(c, out);
  else if (kind == "oracle_check")
    run_oracle_check(c, out);
  else if (kind == "upper_function_check")
    run_upper_function(c, out);
  else if (kind == "testbed_export")
    run_testbed_export(c, out);
  else
    run_membership(c, out);
  return out;
}

std::string results_csv_text(const RunOutputs& out)
{
  //! the thread count cannot change results, so it stays out of the hash
  json key = out.manifest;
  if (key.contains("config"))
    key["config"].erase("threads");
  if (key.contains("defaulted")) {
    auto& d = key["defaulted"];
    d.erase(std::remove(d.begin(), d.end(), json("$.threads")), d.end());
  }
  return "# manifest-fnv1a: " + fnv1a_hex(key.dump()) + "\n" + out.csv;
}

void write_outputs(const std::filesystem::path& dir, const RunOutputs& out)
{
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    f << text;
    if (!f)
      throw std::runtime_error("cannot write " + (dir / name).string());
  };
  put("manifest.json", out.manifest.dump(2) + "\n");
  if (!out.csv.empty())
    put("results.csv", results_csv_text(out));
  if (!out.results.is_null())
    put("results.json", out.results.dump(2) + "\n");
  for (const auto& [name, text] : out.extra)
    put(name, text);
}

json config_schema()
{
  const json number_or_inf = { { "oneOf", json::array({ { { "type", "number" } }, { { "enum", { "inf" } } } }) } };
  const json cls = { { "type", "object" },
                     { "required", { "beta", "r", "L" } },
                     { "properties",
                       { { "beta", { { "type", "array" }, { "items", { { "type", "number" } } } } },
                         { "r", { { "type", "array" }, { "items", number_or_inf } } },
                         { "L", { { "type", "array" }, { "items", { { "type", "number" } } } } } } } };
  return {
    { "$schema", "https://json-schema.org/draft/2020-12/schema" },
    { "title", "wnlab experiment config" },
    { "type", "object" },
    { "required", { "kind" } },
    { "additionalProperties", false },
    { "properties",
      { { "kind",
          { { "enum",
              { "rates_table", "risk_curve", "oracle_check", "upper_function_check", "testbed_export",
                "membership_check" } } } },
        { "comment", { { "type", "string" } } },
        { "seed", { { "type", "integer" }, { "minimum", 0 }, { "default", 1 } } },
        { "threads", { { "type", "integer" }, { "minimum", 0 }, { "default", 0 } } },
        { "grid",
          { { "type", "object" },
            { "properties",
              { { "d", { { "enum", { 1, 2, 3 } } } },
                { "b", { { "type", "number" }, { "exclusiveMinimum", 0 }, { "default", 1 } } },
                { "n", { { "type", "integer" }, { "minimum", 4 }, { "default", 256 } } } } } } },
        { "class", cls },
        { "classes", { { "type", "array" }, { "items", cls } } },
        { "p", { { "oneOf", json::array({ number_or_inf, { { "type", "array" }, { "items", number_or_inf } } }) } } },
        { "q", { { "type", "number" }, { "minimum", 1 }, { "default", 2 } } },
        { "kernel",
          { { "type", "object" },
            { "properties",
              { { "profile", { { "enum", { "cosine_bump", "quartic_spline" } } } },
                { "ell", { { "type", "integer" }, { "minimum", 1 }, { "maximum", 8 } } } } } } },
        { "eps",
          { { "type", "array" },
            { "items", { { "type", "number" }, { "exclusiveMinimum", 0 }, { "exclusiveMaximum", 1 } } } } },
        { "H",
          { { "type", "object" },
            { "properties",
              { { "recipe", { { "enum", { "const_lattice", "dyadic_varying", "oracle_grid" } } } },
                { "levels", { { "type", "array" }, { "items", { { "type", "array" } } } } },
                { "h_max", { { "type", "number" } } },
                { "v_min", { { "type", "number" } } },
                { "level", { { "type", "integer" } } },
                { "count", { { "type", "integer" } } } } } } },
        { "method", { { "enum", { "select_const", "select_varying", "fixed_h" } } } },
        { "fixed_levels", { { "type", "array" }, { "items", { { "type", "integer" } } } } },
        { "reps", { { "type", "integer" }, { "minimum", 30 } } },
        { "bootstrap", { { "type", "integer" }, { "minimum", 2 }, { "default", 1000 } } },
        { "signal",
          { { "type", "object" },
            { "properties",
              { { "kind", { { "enum", { "lacunary", "zero", "family_member" } } } },
                { "smoothness", { { "type", "array" }, { "items", { { "type", "number" } } } } },
                { "terms", { { "type", "integer" } } },
                { "eps", { { "type", "number" } } },
                { "word", { { "type", "integer" } } },
                { "amplitude", { { "type", "number" } } },
                { "amplitude_log_spread", { { "type", "number" }, { "minimum", 0 } } } } } } },
        { "caps",
          { { "type", "object" },
            { "properties",
              { { "H", { { "type", "integer" } } },
                { "oracle_grid", { { "type", "integer" } } },
                { "r", { { "type", "integer" } } } } } } },
        { "constants",
          { { "type", "object" },
            { "properties",
              { { "C2",
                  { { "oneOf",
                      { { { "type", "object" },
                          { "patternProperties",
                            { { "^[0-9]+$", { { "type", "number" }, { "exclusiveMinimum", 0 } } } } } },
                        { { "enum", { "kernel_scaled" } } } } } } },
                { "C1_scale", { { "type", "number" }, { "minimum", 1 } } },
                { "membership_slack", { { "type", "number" }, { "minimum", 0 } } } } } } } } }
  };
}

} // namespace wnlab
