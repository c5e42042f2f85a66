// warpfda command-line front end.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "warpfda/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace warpfda;
  CLI::App app{"Transformation-based PCA of warping functions and joint amplitude/phase PCA"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string transform_name = "clr";
  std::size_t M = 0;
  double C = 0.0;

  const std::map<std::string, TransformKind> kinds{{"srvf", TransformKind::srvf_tangent},
                                                   {"clr", TransformKind::clr},
                                                   {"log-hazard", TransformKind::log_hazard},
                                                   {"log-quantile", TransformKind::log_quantile}};

  auto* gen = app.add_subcommand("gen-toy", "generate a toy dataset of power warpings");
  gen->add_option("--n", cfg.n, "number of samples")->capture_default_str();
  gen->add_option("--grid-size", cfg.grid_size, "grid points")->capture_default_str();
  gen->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  gen->add_option("--a", cfg.a, "left end of T")->capture_default_str();
  gen->add_option("--b", cfg.b, "right end of T")->capture_default_str();
  gen->add_option("--amplitude-sd", cfg.amplitude_sd, "sd of the amplitude factor")
      ->capture_default_str();
  gen->add_flag("--locations", cfg.locations, "also write locations.csv");

  auto* tr = app.add_subcommand("transform", "apply a transformation to warping functions");
  tr->add_option("--warpings", cfg.warpings, "warpings CSV")->required();

  CLI::App* fitters[] = {
      app.add_subcommand("fit-joint", "fit the joint model and export tables"),
      app.add_subcommand("reconstruct", "fit and reconstruct the observed curves"),
      app.add_subcommand("report", "fit and print the model summary"),
  };
  for (auto* sub : fitters) {
    sub->add_option("--registered", cfg.registered, "registered functions CSV")->required();
    sub->add_option("--warpings", cfg.warpings, "warpings CSV (identity if omitted)");
    sub->add_option("--locations", cfg.locations_path, "per-sample columns copied to scores.csv");
    sub->add_option("--tau", cfg.tau, "variance threshold for M")->capture_default_str();
    sub->add_option("--M", M, "number of components (overrides --tau)");
    auto* c_opt = sub->add_option("--C", C, "weight of the phase part");
    sub->add_flag("--optimize-C", cfg.optimize_C, "choose C by minimizing reconstruction error")
        ->excludes(c_opt);
    sub->add_option("--C-min", cfg.search.lo, "search lower bound")->capture_default_str();
    sub->add_option("--C-max", cfg.search.hi, "search upper bound")->capture_default_str();
  }
  for (auto* sub : {tr, fitters[0], fitters[1], fitters[2]}) {
    sub->add_option("--transform", transform_name, "srvf, clr, log-hazard or log-quantile")
        ->capture_default_str()
        ->check(CLI::IsMember(kinds));
    sub->add_option("--delta", cfg.delta, "log-hazard tail threshold")->capture_default_str();
  }
  for (auto* sub : {gen, tr, fitters[0], fitters[1]}) {
    sub->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_validation;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    cfg.command = parse_command(chosen->get_name());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  }
  cfg.transform = kinds.at(transform_name);
  const auto given = [chosen](const char* name) {
    const CLI::Option* opt = chosen->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--M")) cfg.M = M;
  if (given("--C")) cfg.C = C;
  return run_pipeline(cfg, std::cout, std::cerr);
}
