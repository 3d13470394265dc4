#include "wnlab/experiment.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace wnlab;

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "Infinity")
      out.push_back(std::numeric_limits<double>::infinity());
    else {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size())
        throw ValidationError(flag, "cannot parse '" + item + "'");
      out.push_back(v);
    }
  }
  if (out.empty())
    throw ValidationError(flag, "empty list");
  return out;
}

std::filesystem::path output_dir(const std::string& out, const std::string& config)
{
  if (!out.empty())
    return out;
  const char* root = std::getenv("WNLAB_OUTPUT_ROOT");
  std::filesystem::path base = root && *root ? root : "wnlab-out";
  return base / std::filesystem::path(config).stem();
}

json read_raw(const std::string& file)
{
  std::ifstream in(file);
  if (!in)
    throw ValidationError("$", "cannot open config file " + file);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("$", std::string("invalid JSON: ") + e.what());
  }
}

int run_config(const std::string& file, const std::string& out, std::optional<std::uint64_t> seed, bool testbed)
{
  ExperimentConfig cfg;
  try {
    json raw = read_raw(file);
    if (seed && raw.is_object())
      raw["seed"] = *seed;
    if (testbed && raw.is_object()) {
      if (raw.contains("kind") && raw["kind"] != "testbed_export")
        throw ValidationError("$.kind", "export-testbed needs kind testbed_export");
      raw["kind"] = "testbed_export";
    }
    cfg = resolve_config(raw);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  }
  const auto dir = output_dir(out, file);
  RunOutputs res;
  res.manifest = { { "config", cfg.resolved }, { "defaulted", cfg.defaulted }, { "status", "running" } };
  try {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "manifest.json") << res.manifest.dump(2) << '\n';
    res = run_experiment(cfg);
    write_outputs(dir, res);
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    res.manifest["status"] = "failed";
    res.manifest["error"] = e.what();
    std::ofstream(dir / "manifest.json") << res.manifest.dump(2) << '\n';
    return 3;
  }
  std::cout << "wrote " << dir.string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "white-noise adaptive estimation laboratory" };
  app.require_subcommand(1);

  std::string config, out, verify_config;
  std::uint64_t seed = 0;
  std::uint64_t verify_seed = 1;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config, "config file (JSON)")->required();
  run->add_option("--out", out, "output directory (default $WNLAB_OUTPUT_ROOT/<config name>)");
  auto* run_seed = run->add_option("--seed", seed, "override the config seed");

  auto* exp = app.add_subcommand("export-testbed", "export lower-bound test families");
  exp->add_option("config", config, "config file (JSON)")->required();
  exp->add_option("--out", out, "output directory");
  auto* exp_seed = exp->add_option("--seed", seed, "override the config seed");

  auto* ver = app.add_subcommand("verify", "run the fast property suite");
  ver->add_option("--config", verify_config, "config whose constants are checked as well");
  ver->add_option("--seed", verify_seed, "seed of the randomized properties");

  std::string beta, r, L, p = "2", eps;
  auto* rates = app.add_subcommand("rates", "zone, exponent and rates for one class");
  rates->add_option("--beta", beta, "smoothness per axis, comma separated")->required();
  rates->add_option("--r", r, "norm index per axis (inf allowed)")->required();
  rates->add_option("--L", L, "radius per axis")->required();
  rates->add_option("--p", p, "loss norm index (inf allowed)");
  rates->add_option("--eps", eps, "noise levels at which to print the rates");

  auto* schema = app.add_subcommand("schema", "print the config JSON schema");

  CLI11_PARSE(app, argc, argv);

  if (*run)
    return run_config(config, out, run_seed->count() ? std::optional(seed) : std::nullopt, false);
  if (*exp)
    return run_config(config, out, exp_seed->count() ? std::optional(seed) : std::nullopt, true);
  if (*schema) {
    std::cout << config_schema().dump(2) << '\n';
    return 0;
  }
  if (*ver) {
    std::optional<UpperFunctionConfig> cfg;
    if (!verify_config.empty()) {
      try {
        json raw = read_raw(verify_config);
        if (!raw.contains("kind"))
          raw["kind"] = "upper_function_check";
        if (!raw.contains("eps"))
          raw["eps"] = json::array({ 0.05 });
        auto resolved = resolve_config(raw).resolved;
        Grid grid(1, 1.0, 256);
        auto K = make_kernel(KernelProfile::cosine_bump, 2, 1);
        UpperFunctionConfig u = make_upper_config(K, grid, 2.0, 2.0, 0.05);
        const auto& c2 = resolved["constants"]["C2"];
        if (c2.is_string())
          u.C2_table = kernel_scaled_C2(K, 2.0);
        else
          for (auto it = c2.begin(); it != c2.end(); ++it)
            u.C2_table[std::stoi(it.key())] = it->get<double>();
        u.validate();
        cfg = u;
      } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
      }
    }
    bool ok = verify_suite(std::cout, verify_seed, cfg ? &*cfg : nullptr);
    std::cout << (ok ? "all properties pass" : "some properties fail") << '\n';
    return ok ? 0 : 1;
  }
  // rates
  try {
    ClassSpec theta(parse_list(beta, "--beta"), parse_list(r, "--r"), parse_list(L, "--L"));
    const double pv = parse_list(p, "--p").at(0);
    auto pr = classify(theta, pv);
    json j = to_json(pr);
    if (!eps.empty()) {
      json rows = json::array();
      for (double e : parse_list(eps, "--eps")) {
        json row = { { "eps", e }, { "lower_rate", num(lower_rate(theta, pv, e)) } };
        try {
          row["upper_rate"] = num(upper_rate(theta, pv, e));
        } catch (const std::exception& ex) {
          row["upper_rate"] = nullptr;
        }
        rows.push_back(row);
      }
      j["rates"] = rows;
    }
    std::cout << j.dump(2) << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
