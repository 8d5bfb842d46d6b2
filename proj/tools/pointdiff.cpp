// pointdiff: tables, verification suites and sampling runs from the shell.
//
// Exit status: 0 success, 1 failed verification check, 2 usage error,
// 3 numeric failure (the diagnostic goes to stderr).

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "cli_support.hpp"

namespace {

double default_rel_tol() {
  if (const char* env = std::getenv("POINTDIFF_RTOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) throw cli::UsageError("POINTDIFF_RTOL must be a positive number");
    return v;
  }
  return 1e-8;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar point-interaction diffusions: evaluate, verify, sample."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  cli::RunConfig cfg;
  try {
    cfg.rel_tol = default_rel_tol();
  } catch (const cli::UsageError& e) {
    std::cerr << "pointdiff: " << e.what() << '\n';
    return 2;
  }
  app.add_option("--family", cfg.family, "gst | leb | dir:eps=<f> | gau:alpha=<f>")->capture_default_str();
  app.add_option("--theta", cfg.theta, "coupling theta > 0")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--T", cfg.horizon_T, "horizon T > 0")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rtol", cfg.rel_tol, "quadrature relative tolerance (default: $POINTDIFF_RTOL or 1e-8)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "master RNG seed")->capture_default_str();
  app.add_option("--n-paths", cfg.n_paths, "number of draws or paths")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--workers", cfg.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out", cfg.out_path, "output file (default stdout)");
  app.add_option("--format", cfg.format, "csv | json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));

  std::string quantity;
  std::string t_text;
  std::string r_text = "1";
  double x0 = 1.0;
  auto* table = app.add_subcommand("table", "tabulate a quantity over a (t, r) grid");
  table->add_option("quantity", quantity, "kernel | h | drift | density | survival | hitdensity | hmap")
      ->required()
      ->check(CLI::IsMember({"kernel", "h", "drift", "density", "survival", "hitdensity", "hmap"}));
  table->add_option("--t", t_text, "times: a,b,c or lo:hi:n (default T; hitdensity 0:T:401)");
  table->add_option("--r", r_text, "radii: a,b,c or lo:hi:n")->capture_default_str();
  table->add_option("--x0", x0, "start radius for kernel and density")->capture_default_str();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  verify->add_option("suite", suite, "specfun | kernel | families | doob | hmap | sampler | all")->required();

  std::string kind;
  double s = 0.0;
  double t_end = -1.0;
  std::string grid_text;
  bool resolve_hit = false;
  auto* sample = app.add_subcommand("sample", "draw transitions, paths or hitting times");
  sample->add_option("kind", kind, "transition | path | conditional | hit")
      ->required()
      ->check(CLI::IsMember({"transition", "path", "conditional", "hit"}));
  sample->add_option("--x0", x0, "start radius (start point is (x0, 0))")->capture_default_str();
  sample->add_option("--s", s, "transition start time")->capture_default_str();
  sample->add_option("--t", t_end, "transition end time (default T)");
  sample->add_option("--grid", grid_text, "path grid starting at 0 (default 0:T:5)");
  sample->add_flag("--resolve-hit", resolve_hit, "continue paths through the hitting time (unsupported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*table) {
      if (t_text.empty()) {
        t_text = quantity == "hitdensity" ? "0:" + cli::format_double(cfg.horizon_T) + ":401"
                                          : cli::format_double(cfg.horizon_T);
      }
      return cli::cmd_table(cfg, quantity, cli::parse_grid(t_text), cli::parse_grid(r_text), x0);
    }
    if (*verify) return cli::cmd_verify(cfg, suite);
    if (grid_text.empty()) grid_text = "0:" + cli::format_double(cfg.horizon_T) + ":5";
    return cli::cmd_sample(cfg, kind, x0, s, t_end < 0.0 ? cfg.horizon_T : t_end, cli::parse_grid(grid_text),
                           resolve_hit);
  } catch (const cli::UsageError& e) {
    std::cerr << "pointdiff: " << e.what() << '\n';
    return 2;
  } catch (const pointdiff::DomainError& e) {
    std::cerr << "pointdiff: invalid arguments: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pointdiff: numeric failure: " << e.what() << '\n';
    return 3;
  }
}
