#include <iostream>
#include <map>
#include <memory>

#include "cli_support.hpp"
#include "pointdiff/doob.hpp"
#include "pointdiff/hmap.hpp"
#include "pointdiff/kernel.hpp"
#include "pointdiff/sampler.hpp"

namespace cli {

using namespace pointdiff;

namespace {

bool is_numeric_failure(const std::exception& e) {
  return dynamic_cast<const ToleranceError*>(&e) || dynamic_cast<const DivergenceError*>(&e) ||
         dynamic_cast<const SamplerError*>(&e) || dynamic_cast<const HypothesisViolation*>(&e);
}

std::map<std::string, std::string> base_meta(const RunConfig& cfg) {
  return {{"family", cfg.family_spec().selector()},
          {"theta", format_double(cfg.theta)},
          {"T", format_double(cfg.horizon_T)},
          {"rel_tol", format_double(cfg.rel_tol)}};
}

}  // namespace

int cmd_table(const RunConfig& cfg, const std::string& quantity, const std::vector<double>& t_grid,
              const std::vector<double>& r_grid, double x0) {
  const FamilySpec fam = cfg.family_spec();
  const DensityEval d(fam, cfg.quad());
  const KernelParams kp{cfg.theta, cfg.quad()};
  std::unique_ptr<HEval> hmap;
  if (quantity == "hmap") hmap = std::make_unique<HEval>(fam, cfg.quad());
  std::map<double, std::unique_ptr<HitLaw>> hit_laws;

  auto value_at = [&](double t, double r) -> double {
    const PlanarPoint y{r, 0.0};
    if (quantity == "kernel") return full_kernel(kp, t, {x0, 0.0}, y);
    if (quantity == "h") return h_eval(fam, t, y);
    if (quantity == "drift") return drift_eval(fam, t, y).radial_part;
    if (quantity == "density") {
      return x0 == 0.0 ? transition_density_from_origin(d, 0.0, t, y).value
                       : transition_density(d, 0.0, t, {x0, 0.0}, y);
    }
    if (quantity == "survival") return survival_probability(d, t, y);
    if (quantity == "hitdensity") {
      auto& law = hit_laws[r];
      if (!law) law = std::make_unique<HitLaw>(d, y);
      return law->density(t);
    }
    if (quantity == "hmap") return h_map(*hmap, t, y).x;
    throw UsageError("unknown quantity '" + quantity + "'");
  };

  Table table;
  table.columns = {"t", "r", "value", "err_estimate"};
  table.meta = base_meta(cfg);
  table.meta["quantity"] = quantity;
  if (quantity == "kernel" || quantity == "density") table.meta["x0"] = format_double(x0);
  int failures = 0;
  for (double t : t_grid) {
    for (double r : r_grid) {
      try {
        const double v = value_at(t, r);
        table.rows.push_back({t, r, v, cfg.quad().target(v)});
      } catch (const std::exception& e) {
        if (!is_numeric_failure(e) && !dynamic_cast<const DomainError*>(&e)) throw;
        std::cerr << "pointdiff: " << quantity << " failed at t=" << format_double(t) << " r=" << format_double(r)
                  << ": " << e.what() << '\n';
        table.rows.push_back({t, r, std::nan(""), std::nan("")});
        ++failures;
      }
    }
  }
  emit(table, cfg);
  return failures ? 3 : 0;
}

int cmd_sample(const RunConfig& cfg, const std::string& kind, double x0, double s, double t,
               const std::vector<double>& grid, bool resolve_hit) {
  const DensityEval d(cfg.family_spec(), cfg.quad());
  const PlanarPoint start{x0, 0.0};
  Table table;
  table.meta = base_meta(cfg);
  table.meta["kind"] = kind;
  table.meta["seed"] = std::to_string(cfg.seed);
  table.meta["n_paths"] = std::to_string(cfg.n_paths);
  table.meta["x0"] = format_double(x0);

  if (kind == "transition") {
    SamplerStats stats;
    const auto ys = sample_transitions(d, s, t, start, cfg.n_paths, cfg.seed, cfg.workers, &stats);
    table.columns = {"index", "x", "y"};
    for (std::size_t i = 0; i < ys.size(); ++i) table.rows.push_back({double(i), ys[i].x, ys[i].y});
    table.meta["s"] = format_double(s);
    table.meta["t"] = format_double(t);
    table.meta["acceptance_rate"] = format_double(stats.acceptance_rate());
    table.meta["mode"] = "marginal_exact";
  } else if (kind == "path" || kind == "conditional") {
    if (resolve_hit) {
      throw SamplerError("paths through the hitting time are not supported; sample tau with 'sample hit'");
    }
    const bool conditional = kind == "conditional";
    const auto paths = parallel_map<PathSample>(cfg.n_paths, cfg.workers, [&](long i) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
      return conditional ? sample_conditional_path(d, start, grid, rng) : sample_path_marginal(d, start, grid, rng);
    });
    table.columns = {"path", "t", "x", "y"};
    for (std::size_t i = 0; i < paths.size(); ++i) {
      for (std::size_t k = 0; k < paths[i].grid.size(); ++k) {
        table.rows.push_back({double(i), paths[i].grid[k], paths[i].points[k].x, paths[i].points[k].y});
      }
    }
    const PathMode mode = paths.empty() ? PathMode::marginal_exact : paths.front().mode;
    table.meta["mode"] = mode == PathMode::euler_approx        ? "euler_approx"
                         : mode == PathMode::conditional_exact ? "conditional_exact"
                                                               : "marginal_exact";
  } else if (kind == "hit") {
    const HitLaw law(d, start);
    const auto taus = parallel_map<std::optional<double>>(cfg.n_paths, cfg.workers, [&](long i) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(i));
      return sample_hit_time(law, rng);
    });
    table.columns = {"path", "hit", "tau"};
    for (std::size_t i = 0; i < taus.size(); ++i) {
      table.rows.push_back({double(i), taus[i] ? 1.0 : 0.0, taus[i].value_or(std::nan(""))});
    }
    table.meta["survive_prob"] = format_double(law.survive_prob());
  } else {
    throw UsageError("unknown sample kind '" + kind + "'");
  }
  emit(table, cfg);
  return 0;
}

}  // namespace cli
