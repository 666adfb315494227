#include <iostream>

#include "CLI11.hpp"
#include "minimax/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimality certificates for constrained minimax problems"};
  app.require_subcommand(1);
  mmx::RunRequest req;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool candidate) {
    sub->add_option("problem", req.problem_path, "problem file")->required();
    if (!candidate) return;
    sub->add_option("--x", req.x, "upper variables, comma-separated (repeat for several candidates)")
        ->required()
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--y", req.y, "lower variables, comma-separated")->take_all()->allow_extra_args(false);
    sub->add_option("--mu", req.mu, "lower equality multipliers");
    sub->add_option("--lambda", req.lambda, "lower inequality multipliers");
    sub->add_option("--u", req.u, "upper equality multipliers");
    sub->add_option("--v", req.v, "upper inequality multipliers");
    sub->add_option("--config", req.config_path, "key=value configuration file");
    sub->add_option("--json", req.json_path, "write the JSON report here");
    sub->add_option("--jobs", req.jobs, "parallel candidates")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "sampling seed");
  };
  add_common(app.add_subcommand("validate", "parse and dimension-check a problem file"), false);
  add_common(app.add_subcommand("certify", "full certification pipeline"), true);
  add_common(app.add_subcommand("value-derivs", "phi, grad phi, hess phi and FD comparison"), true);
  add_common(app.add_subcommand("solve-lower", "Newton solve of the lower-level KKT system"), true);
  add_common(app.add_subcommand("oracle", "grid check of the local minimax definition"), true);
  add_common(app.add_subcommand("subdiff", "selector enumeration and candidate gradients"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  CLI::App* sub = app.get_subcommands().front();
  req.command = sub->get_name();
  if (sub->get_option_no_throw("--seed") && sub->count("--seed") > 0) req.seed = seed;
  return mmx::run(req, std::cout, std::cerr);
}
