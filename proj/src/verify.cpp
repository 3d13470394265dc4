#include "wnlab/experiment.hpp"
#include "wnlab/estimator.hpp"
#include "wnlab/rng.hpp"

#include <cmath>
#include <functional>
#include <ostream>

namespace wnlab {

namespace {

struct Property
{
  std::string name;
  std::function<bool(std::string&)> check; // fills a short detail line
};

ClassSpec random_class(std::mt19937_64& eng, int d)
{
  std::uniform_real_distribution<double> beta(0.3, 4.0), r(1.0, 8.0), L(0.5, 5.0), u(0.0, 1.0);
  std::vector<double> b(d), rr(d), l(d);
  for (int j = 0; j < d; ++j) {
    b[j] = beta(eng);
    rr[j] = u(eng) < 0.2 ? std::numeric_limits<double>::infinity() : r(eng);
    l[j] = L(eng);
  }
  return ClassSpec(b, rr, l);
}

} // namespace

bool verify_suite(std::ostream& os, std::uint64_t seed, const UpperFunctionConfig* overrides)
{
  std::vector<Property> props;

  props.push_back({ "kernel moments", [](std::string& detail) {
                     double worst = 0.0;
                     for (auto prof : { KernelProfile::cosine_bump, KernelProfile::quartic_spline })
                       for (int ell = 1; ell <= 3; ++ell) {
                         auto K = make_kernel(prof, ell, 1);
                         worst = std::max(worst, std::abs(kernel_moment(K.scalar, 0) - 1.0) * 100.0);
                         for (int k = 1; k < ell; ++k)
                           worst = std::max(worst, std::abs(kernel_moment(K.scalar, k)));
                       }
                     detail = "worst scaled deviation " + std::to_string(worst);
                     return worst <= 1e-8;
                   } });

  props.push_back({ "kernel regularity", [](std::string& detail) {
                     for (int ell = 1; ell <= 3; ++ell) {
                       auto rep = check_assumption1(make_kernel(KernelProfile::cosine_bump, ell, 2));
                       if (!rep.pass) {
                         detail = rep.failure;
                         return false;
                       }
                     }
                     return true;
                   } });

  props.push_back({ "packing certificates", [seed](std::string& detail) {
                     for (auto [m, n] : { std::pair{ 4, 36 }, { 4, 64 }, { 8, 80 } }) {
                       auto set = vg_set(m, n, seed);
                       auto cert = certify_vg(set.words, m, n);
                       if (!cert.ok()) {
                         detail = "(m,n)=(" + std::to_string(m) + "," + std::to_string(n) + ")";
                         return false;
                       }
                     }
                     return true;
                   } });

  props.push_back({ "lattice join complexity", [seed](std::string& detail) {
                     int checked = 0;
                     for (int d = 1; d <= 2; ++d) {
                       Grid grid(d, 1.0, d == 1 ? 256 : 32);
                       const double kap = 1.0 / (2.0 * d);
                       const int top = resolvability_floor(grid);
                       for (int i = 0; i < 10; ++i) {
                         auto h = random_bandwidth_field(grid, 2, top, seed, 2 * i + 100 * d);
                         auto eta = random_bandwidth_field(grid, 3, top, seed, 2 * i + 1 + 100 * d);
                         const double L = std::max(complexity(h, kap), complexity(eta, kap));
                         const double A = std::max({ std::exp(static_cast<double>(d)),
                                                     inv_sqrt_volume_norm(h, 6.0), inv_sqrt_volume_norm(eta, 6.0) });
                         auto j = lattice_join(h, eta);
                         if (!member_Hd(j, d * kap, std::pow(2.0 * L, d)) || !member_B(j, A, 2.0)) {
                           detail = "pair " + std::to_string(i) + " in d=" + std::to_string(d);
                           return false;
                         }
                         ++checked;
                       }
                     }
                     detail = std::to_string(checked) + " pairs";
                     return true;
                   } });

  props.push_back({ "canned family membership", [seed](std::string& detail) {
                     ClassSpec theta({ 1.0 }, { std::numeric_limits<double>::infinity() }, { 12.0 });
                     auto fam = build_family(theta, 2.0, 0.05, default_lower_bound_constants(theta, 2.0), 1.0, seed);
                     Grid grid(1, 1.0, 256);
                     auto u = default_u_grid(grid);
                     for (std::size_t w = 1; w < fam.W.size(); ++w)
                       if (!check_membership(render_family_member(fam, fam.W[w], grid), theta, u, 0.1).pass) {
                         detail = "word " + std::to_string(w);
                         return false;
                       }
                     detail = std::to_string(fam.W.size() - 1) + " members";
                     return true;
                   } });

  props.push_back({ "kappa-tau relation", [seed](std::string& detail) {
                     auto eng = make_engine(seed, 0x7a7a);
                     double worst = 0.0;
                     for (int i = 0; i < 100; ++i) {
                       auto theta = random_class(eng, 1 + i % 3);
                       auto pr = aggregates(theta, 2.0);
                       if (std::isinf(pr.omega))
                         continue;
                       for (double s : { 1.0, 2.0, 3.0, 5.0, 10.0 })
                         worst = std::max(worst, std::abs(kappa(pr, s) / (pr.omega * s) - (2.0 - s) / s - tau(pr, s)));
                     }
                     detail = "max deviation " + std::to_string(worst);
                     return worst <= 1e-12;
                   } });

  props.push_back({ "difference annihilation", [](std::string& detail) {
                     Grid grid(1, 1.0, 256);
                     auto f = tabulate(grid, [](std::span<const double> x) { return 3.0 * x[0] - 0.5; });
                     const double u = 4.0 * grid.step();
                     auto D = difference(f, u, 0, 2);
                     double worst = 0.0;
                     for (int i = 0; i + 8 < 256; ++i)
                       worst = std::max(worst, std::abs(D.values[i]));
                     detail = "max interior value " + std::to_string(worst);
                     return worst <= 1e-12;
                   } });

  if (overrides)
    props.push_back({ "upper-function constants", [overrides](std::string& detail) {
                       try {
                         overrides->validate();
                       } catch (const std::exception& e) {
                         detail = e.what();
                         return false;
                       }
                       return std::isfinite(overrides->C2p()) || std::isinf(overrides->p);
                     } });

  bool all = true;
  for (const auto& p : props) {
    std::string detail;
    bool ok = false;
    try {
      ok = p.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    os << (ok ? "PASS " : "FAIL ") << p.name << (detail.empty() ? "" : " (" + detail + ")") << '\n';
    all = all && ok;
  }
  return all;
}

} // namespace wnlab
