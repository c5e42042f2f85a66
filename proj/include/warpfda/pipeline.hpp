#pragma once

// End-to-end runs: generate or ingest data, transform the warpings, fit the
// joint model and export tables. Every artifact is a pure function of the
// RunConfig, so repeated runs produce byte-identical files.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "warpfda/csv.hpp"
#include "warpfda/error.hpp"
#include "warpfda/joint_pca.hpp"
#include "warpfda/synthgen.hpp"
#include "warpfda/transforms.hpp"

namespace warpfda {

enum class Command { gen_toy, transform, fit_joint, reconstruct, report };

inline Command parse_command(std::string_view name) {
  if (name == "gen-toy") return Command::gen_toy;
  if (name == "transform") return Command::transform;
  if (name == "fit-joint") return Command::fit_joint;
  if (name == "reconstruct") return Command::reconstruct;
  if (name == "report") return Command::report;
  throw ParameterError("unknown command '" + std::string(name) + "'");
}

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_numerical = 2;

struct RunConfig {
  Command command = Command::fit_joint;
  TransformKind transform = TransformKind::clr;
  double delta = 0.05;
  double tau = 0.95;
  std::optional<std::size_t> M;
  std::optional<double> C;
  bool optimize_C = false;
  WeightSearch search{};

  // gen-toy
  std::uint64_t seed = 0;
  std::size_t n = 50;
  std::size_t grid_size = 201;
  double a = 0.0;
  double b = 1.0;
  double amplitude_sd = 0.1;
  bool locations = false;

  std::optional<std::string> registered;
  std::optional<std::string> warpings;
  std::optional<std::string> locations_path;
  std::string out_dir = ".";

  bool fits() const {
    return command == Command::fit_joint || command == Command::reconstruct ||
           command == Command::report;
  }

  TransformId transform_id() const {
    switch (transform) {
      case TransformKind::srvf_tangent: return TransformId::srvf();
      case TransformKind::clr: return TransformId::clr();
      case TransformKind::log_hazard: return TransformId::log_hazard(delta);
      case TransformKind::log_quantile: return TransformId::log_quantile();
    }
    throw ParameterError("unknown transform");
  }

  void validate() const {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw ParameterError("tau must lie in (0, 1)");
    }
    validate_delta(delta);
    if (fits()) {
      if (C.has_value() == optimize_C) {
        throw ParameterError("give exactly one of --C and --optimize-C");
      }
      if (C && !(*C > 0.0 && std::isfinite(*C))) {
        throw ParameterError("C must be positive");
      }
      if (optimize_C && !M) {
        throw ParameterError("--optimize-C needs a fixed --M");
      }
      if (M && *M == 0) {
        throw ParameterError("M must be at least 1");
      }
      if (!registered) {
        throw ParameterError("--registered is required");
      }
    }
    if (command == Command::transform && !warpings) {
      throw ParameterError("--warpings is required");
    }
  }
};

struct JointFit {
  Dataset data;
  std::vector<JointSample> samples;
  JointPcaModel model;
  bool optimized = false;
  std::size_t M = 0;
};

inline JointFit fit_from_config(const RunConfig& cfg) {
  Dataset data = ingest_csv(*cfg.registered, cfg.warpings, cfg.locations_path);
  const TransformId id = cfg.transform_id();
  std::vector<JointSample> samples;
  samples.reserve(data.registered.size());
  for (std::size_t i = 0; i < data.registered.size(); ++i) {
    samples.push_back(JointSample::make(data.registered[i], data.warpings[i], id));
  }
  double C = cfg.C.value_or(1.0);
  if (cfg.optimize_C) {
    C = optimize_C(samples, id, *cfg.M, cfg.search).C;
  }
  JointPcaModel model = fit_joint(samples, id, C);
  std::size_t M;
  if (cfg.M) {
    if (*cfg.M > model.size()) {
      throw TruncationError("M = " + std::to_string(*cfg.M) + " exceeds the " +
                            std::to_string(model.size()) + " available components");
    }
    M = *cfg.M;
  } else {
    M = select_M(model.nus, cfg.tau);
  }
  return JointFit{std::move(data), std::move(samples), std::move(model), cfg.optimize_C, M};
}

/// Line-oriented key: value document.
inline std::string summary_text(const RunConfig& cfg, const JointFit& fit) {
  const auto& model = fit.model;
  std::ostringstream out;
  out << "transform: " << to_string(cfg.transform) << '\n';
  if (cfg.transform == TransformKind::log_hazard) {
    out << "delta: " << format_number(cfg.delta) << '\n';
  }
  out << "samples: " << fit.samples.size() << '\n';
  out << "grid_size: " << fit.data.grid->size() << '\n';
  out << "C: " << format_number(model.C) << '\n';
  out << "C_optimized: " << (fit.optimized ? "true" : "false") << '\n';
  out << "tau: " << format_number(cfg.tau) << '\n';
  out << "M: " << fit.M << '\n';
  out << "M_selected: " << (cfg.M ? "false" : "true") << '\n';
  const auto dec = variance_decomposition(model, fit.M);
  out << "frechet_variance: " << format_number(frechet_variance(fit.samples, model.C)) << '\n';
  out << "total_eigenvalues: " << format_number(dec.explained + dec.residual) << '\n';
  out << "explained_variance: " << format_number(dec.explained) << '\n';
  out << "explained_ratio: " << format_number(dec.ratio) << '\n';
  out << "components: " << model.size() << '\n';
  const double total = dec.explained + dec.residual;
  double cumulative = 0.0;
  for (std::size_t m = 0; m < model.size(); ++m) {
    const double nu = model.nus[m];
    cumulative += nu;
    const double share = total > 0.0 ? nu / total : 0.0;
    char pct[32];
    std::snprintf(pct, sizeof pct, "%.1f", 100.0 * share);
    out << "eigenvalue_" << m + 1 << ": " << format_number(nu) << '\n';
    out << "explained_" << m + 1 << ": " << format_number(share) << '\n';
    out << "explained_percent_" << m + 1 << ": " << pct << '\n';
    out << "cumulative_" << m + 1 << ": " << format_number(total > 0.0 ? cumulative / total : 0.0)
        << '\n';
  }
  return out.str();
}

/// Mean curve and the +-sqrt(nu_m) perturbations for component m (0-based),
/// in the joint, phase-only and amplitude-only variants.
inline CsvTable component_table(const JointPcaModel& model, std::size_t m) {
  const auto& phi = model.components[m];
  const double sd = std::sqrt(model.nus[m]);
  const GridPtr& grid = model.warp_grid();
  const auto curve = [&](double alpha_w, double alpha_v) {
    const GridFunction w = model.mean_w + (alpha_w * sd) * phi.w;
    const GridFunction v = model.mean_v + (alpha_v * sd) * phi.v;
    return compose(w, inverse_transform(v, model.transform, grid));
  };
  std::vector<GridFunction> cols{phi.w, phi.v, curve(0, 0)};
  for (const auto& [aw, av] : {std::pair{1.0, 1.0}, std::pair{0.0, 1.0}, std::pair{1.0, 0.0}}) {
    cols.push_back(curve(aw, av));
    cols.push_back(curve(-aw, -av));
  }
  CsvTable table;
  table.header = {"t",          "phi_w",       "t_v",         "phi_v",       "mean",
                  "joint_plus", "joint_minus", "phase_plus",  "phase_minus", "amplitude_plus",
                  "amplitude_minus"};
  const auto t = grid->points();
  const auto tv = phi.v.grid().points();
  for (std::size_t j = 0; j < t.size(); ++j) {
    std::vector<std::string> row{format_number(t[j]), format_number(cols[0][j]),
                                 format_number(tv[j])};
    for (std::size_t c = 1; c < cols.size(); ++c) {
      row.push_back(format_number(cols[c][j]));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline CsvTable score_table(const JointFit& fit) {
  CsvTable table;
  table.header = {"sample"};
  for (std::size_t m = 0; m < fit.M; ++m) {
    table.header.push_back("rho_" + std::to_string(m + 1));
  }
  const auto& loc = fit.data.locations;
  if (loc) {
    table.header.insert(table.header.end(), loc->header.begin(), loc->header.end());
  }
  for (std::size_t i = 0; i < fit.samples.size(); ++i) {
    std::vector<std::string> row{fit.data.names[i]};
    for (std::size_t m = 0; m < fit.M; ++m) {
      row.push_back(format_number(fit.model.scores(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(m))));
    }
    if (loc) {
      row.insert(row.end(), loc->rows[i].begin(), loc->rows[i].end());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace detail {

inline std::vector<std::span<const double>> spans_of(const std::vector<GridFunction>& fs) {
  std::vector<std::span<const double>> out;
  for (const auto& f : fs) out.push_back(f.values());
  return out;
}

inline std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw ValidationError("cannot write " + path);
  }
}

inline void gen_toy(const RunConfig& cfg, std::ostream& log) {
  ToyConfig toy;
  toy.n = cfg.n;
  toy.grid_size = cfg.grid_size;
  toy.seed = cfg.seed;
  toy.a = cfg.a;
  toy.b = cfg.b;
  const auto samples = gen_toy_joint(toy, AmplitudeSpec{cfg.amplitude_sd, true}, TransformId::clr());
  std::vector<std::string> names;
  std::vector<GridFunction> ws;
  std::vector<GridFunction> gammas;
  std::vector<GridFunction> xs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    names.push_back("s" + std::to_string(i + 1));
    ws.push_back(samples[i].w);
    gammas.push_back(samples[i].gamma.function());
    xs.push_back(samples[i].x);
  }
  const auto t = samples.front().w.grid().points();
  write_csv(join_path(cfg.out_dir, "registered.csv"), columns_table("t", t, names, spans_of(ws)));
  write_csv(join_path(cfg.out_dir, "warpings.csv"), columns_table("t", t, names, spans_of(gammas)));
  write_csv(join_path(cfg.out_dir, "observed.csv"), columns_table("t", t, names, spans_of(xs)));
  std::size_t files = 3;
  if (cfg.locations) {
    RandomStream rng(cfg.seed, 2);
    CsvTable loc;
    loc.header = {"easting", "northing"};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double e = 100.0 * rng.uniform();
      const double n = 100.0 * rng.uniform();
      loc.rows.push_back({format_number(e), format_number(n)});
    }
    write_csv(join_path(cfg.out_dir, "locations.csv"), loc);
    ++files;
  }
  log << "gen-toy: wrote " << samples.size() << " samples on " << t.size() << " points ("
      << files << " files) to " << cfg.out_dir << '\n';
}

inline void transform_only(const RunConfig& cfg, std::ostream& log) {
  const ColumnData warp = read_columns(*cfg.warpings);
  const TransformId id = cfg.transform_id();
  std::vector<GridFunction> vs;
  for (std::size_t c = 0; c < warp.columns.size(); ++c) {
    vs.push_back(transform(validate_warping(GridFunction(warp.grid, warp.columns[c])), id));
  }
  const char* axis = cfg.transform == TransformKind::log_quantile ? "p" : "t";
  write_csv(join_path(cfg.out_dir, "transformed.csv"),
            columns_table(axis, vs.front().grid().points(), warp.names, spans_of(vs)));
  log << "transform: " << to_string(cfg.transform) << " applied to " << vs.size()
      << " warpings\n";
}

inline void export_fit(const RunConfig& cfg, const JointFit& fit, const std::string& summary) {
  write_text(join_path(cfg.out_dir, "summary.txt"), summary);
  for (std::size_t m = 0; m < fit.M; ++m) {
    write_csv(join_path(cfg.out_dir, "components_" + std::to_string(m + 1) + ".csv"),
              component_table(fit.model, m));
  }
  write_csv(join_path(cfg.out_dir, "scores.csv"), score_table(fit));
}

inline void reconstruct_all(const RunConfig& cfg, const JointFit& fit, std::ostream& log) {
  std::vector<GridFunction> xs;
  std::vector<GridFunction> gammas;
  double err = 0.0;
  for (std::size_t i = 0; i < fit.samples.size(); ++i) {
    auto rec = reconstruct_x(fit.model, fit.model.sample_scores(i), fit.M);
    err += squared_norm(fit.samples[i].x - rec.x_hat);
    xs.push_back(std::move(rec.x_hat));
    gammas.push_back(rec.gamma_hat.function());
  }
  err /= static_cast<double>(fit.samples.size());
  const auto t = fit.data.grid->points();
  write_csv(join_path(cfg.out_dir, "reconstructed.csv"),
            columns_table("t", t, fit.data.names, spans_of(xs)));
  write_csv(join_path(cfg.out_dir, "reconstructed_warpings.csv"),
            columns_table("t", t, fit.data.names, spans_of(gammas)));
  write_text(join_path(cfg.out_dir, "summary.txt"),
             summary_text(cfg, fit) + "mean_squared_error: " + format_number(err) + '\n');
  log << "reconstruct: M = " << fit.M << ", mean squared error " << format_number(err) << '\n';
}

}  // namespace detail

/// Runs one command. Returns 0 on success, 1 for invalid input and 2 for
/// numerical failures; diagnostics go to `err`.
inline int run_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    if (cfg.command != Command::report) {
      std::filesystem::create_directories(cfg.out_dir);
    }
    switch (cfg.command) {
      case Command::gen_toy: detail::gen_toy(cfg, out); break;
      case Command::transform: detail::transform_only(cfg, out); break;
      case Command::fit_joint: {
        const JointFit fit = fit_from_config(cfg);
        detail::export_fit(cfg, fit, summary_text(cfg, fit));
        out << "fit-joint: M = " << fit.M << ", C = " << format_number(fit.model.C) << ", wrote "
            << fit.M + 2 << " files to " << cfg.out_dir << '\n';
        break;
      }
      case Command::reconstruct: detail::reconstruct_all(cfg, fit_from_config(cfg), out); break;
      case Command::report: out << summary_text(cfg, fit_from_config(cfg)); break;
    }
    return exit_ok;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.category() == ErrorCategory::numerical ? exit_numerical : exit_validation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace warpfda
