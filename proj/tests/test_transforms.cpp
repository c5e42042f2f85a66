#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "warpfda/fpca.hpp"
#include "warpfda/synthgen.hpp"
#include "warpfda/transforms.hpp"

using namespace warpfda;

namespace {

GridPtr unit(std::size_t n) { return Grid::uniform(0.0, 1.0, n); }

// Smooth strictly positive random density on g.
DensityFunction random_density(std::mt19937& rng, const GridPtr& g) {
  std::normal_distribution<double> z(0.0, 0.7);
  const double c1 = z(rng), c2 = z(rng), c3 = z(rng);
  return DensityFunction::normalize(GridFunction::sample(g, [&](double t) {
    const double s = (t - g->a()) / g->eta();
    return std::exp(c1 * s + c2 * std::sin(2 * std::numbers::pi * s) + c3 * s * s);
  }));
}

// Brute-force double integral (1/2eta) iint log(f(x)/f(y)) log(g(x)/g(y)) dy dx.
double bayes_inner_double_integral(const DensityFunction& f, const DensityFunction& g) {
  const Grid& grid = f.grid();
  const auto w = grid.weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      acc += w[i] * w[k] * std::log(f[i] / f[k]) * std::log(g[i] / g[k]);
    }
  }
  return acc / (2.0 * grid.eta());
}

GridFunction random_tangent(std::mt19937& rng, const Srvf& mu, double length) {
  std::normal_distribution<double> z;
  const double c1 = z(rng), c2 = z(rng), c3 = z(rng);
  const GridFunction& m = mu.function();
  GridFunction raw = GridFunction::sample(m.grid_ptr(), [&](double t) {
    return c1 * t + c2 * std::cos(3 * t) + c3 * std::sin(7 * t);
  });
  raw = raw - (inner_product(raw, m) / squared_norm(m)) * m;
  return (length / norm(raw)) * raw;
}

}  // namespace

// ---- SRVF ----

TEST(SrvfForward, IdentityGivesOne) {
  const auto q = srvf_forward(WarpingFunction::identity(unit(21)));
  for (double x : q.function().values()) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(SrvfForward, PowerFamilyMatchesClosedForm) {
  const auto g = unit(201);
  for (double k : {0.5, 2.0, 4.0}) {
    const auto gam = validate_warping(GridFunction::sample(g, [k](double t) { return std::pow(t, k); }));
    const auto q = srvf_forward(gam);
    EXPECT_NEAR(squared_norm(q.function()), 1.0, 1e-6);
    for (std::size_t j = 20; j < g->size(); ++j) {
      EXPECT_NEAR(q.function()[j], std::sqrt(k * std::pow(g->point(j), k - 1)), 1e-2) << k;
    }
  }
}

TEST(TangentProject, SelfProjectionIsZero) {
  const auto mu = Srvf::identity(unit(31));
  const auto proj = tangent_project(mu, mu);
  EXPECT_EQ(proj.theta, 0.0);
  EXPECT_LT(sup_norm(proj.vector.function()), 1e-15);
}

TEST(TangentProject, QuarticAngle) {
  const auto g = unit(201);
  const auto q = srvf_from_density(power_warping(g, 4.0).density);
  const auto proj = tangent_project(q, Srvf::identity(g));
  EXPECT_NEAR(proj.theta, std::acos(0.8), 1e-3);
  EXPECT_NEAR(norm(proj.vector.function()), std::acos(0.8), 1e-3);
}

TEST(TangentProject, TangentToMuForRandomPowers) {
  const auto g = unit(201);
  const auto mu = Srvf::identity(g);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uk(0.2, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto q = srvf_from_density(power_warping(g, uk(rng)).density);
    EXPECT_LT(std::abs(inner_product(tangent_project(q, mu).vector.function(), mu.function())), 1e-6);
  }
}

TEST(TangentProject, OrthogonalInputWarns) {
  const auto g = unit(5);
  // Disjoint supports: q and mu are orthogonal.
  const double c = std::sqrt(8.0 / 3.0);
  const auto mu = Srvf::validate(GridFunction(g, {0, 0, 0, c, c}));
  const auto q = Srvf::validate(GridFunction(g, {c, c, 0, 0, 0}));
  WarningLog log;
  const auto proj = tangent_project(q, mu, &log);
  EXPECT_TRUE(proj.degenerate);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].kind, WarningKind::degenerate_tangent);
}

TEST(TangentVector, RejectsNonTangent) {
  const auto g = unit(11);
  EXPECT_THROW(TangentVector(GridFunction::constant(g, 0.1), Srvf::identity(g)), ValidationError);
}

TEST(TangentInverse, ZeroGivesMu) {
  const auto mu = Srvf::identity(unit(11));
  const auto s = tangent_inverse(TangentVector(GridFunction::constant(unit(11), 0.0), mu));
  EXPECT_LT(sup_distance(s.function, mu.function()), 1e-15);
  EXPECT_TRUE(s.in_positive_orthant);
}

TEST(TangentInverse, RoundtripOnImage) {
  const auto g = unit(201);
  const auto mu = Srvf::identity(g);
  for (double k : {0.3, 0.8, 1.7, 3.0}) {
    const auto q = srvf_from_density(power_warping(g, k).density);
    const auto back = tangent_inverse(tangent_project(q, mu).vector);
    EXPECT_LT(sup_distance(back.function, q.function()), 1e-6) << k;
  }
}

TEST(TangentInverse, StaysOnSphere) {
  const auto g = Grid::uniform(0.0, 2.5, 151);
  const auto mu = Srvf::identity(g);
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> ulen(1e-3, std::numbers::pi - 1e-3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto v = random_tangent(rng, mu, ulen(rng));
    const auto s = tangent_inverse(TangentVector(v, mu));
    EXPECT_NEAR(squared_norm(s.function), g->eta(), 1e-6 * g->eta());
  }
}

TEST(SrvfInverse, OneGivesIdentity) {
  const auto g = unit(21);
  const auto gam = srvf_inverse(GridFunction::constant(g, 1.0));
  for (std::size_t j = 0; j < g->size(); ++j) EXPECT_NEAR(gam[j], g->point(j), 1e-14);
}

TEST(SrvfInverse, RoundtripAndRefinement) {
  for (double k : {0.5, 2.0, 3.0}) {
    double prev = INFINITY;
    for (std::size_t n : {101u, 201u, 401u}) {
      const auto g = unit(n);
      const auto gam = validate_warping(GridFunction::sample(g, [k](double t) { return std::pow(t, k); }));
      const double err = sup_distance(srvf_inverse(srvf_forward(gam).function()).function(), gam.function());
      EXPECT_LT(err, 1.0 / static_cast<double>(n));
      EXPECT_LE(err, prev);
      prev = err;
    }
  }
}

TEST(SrvfInverse, SignChangesStillGiveAWarping) {
  const auto g = unit(101);
  GridFunction s = GridFunction::sample(g, [](double t) { return std::cos(3 * std::numbers::pi * t); });
  s = (1.0 / norm(s)) * s;
  EXPECT_LT(s.min(), 0.0);
  EXPECT_NO_THROW(srvf_inverse(s));
  EXPECT_THROW(srvf_inverse(2.0 * s), ValidationError);
}

TEST(ImageMembership, ZeroAndProjectedVectorsPass) {
  const auto g = unit(201);
  const auto mu = Srvf::identity(g);
  EXPECT_TRUE(check_image_membership(TangentVector(GridFunction::constant(g, 0.0), mu)).all());
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> uk(0.2, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto q = srvf_from_density(power_warping(g, uk(rng)).density);
    EXPECT_TRUE(check_image_membership(tangent_project(q, mu).vector).all());
  }
}

TEST(ImageMembership, ToyFirstEigenfunctionLeavesImage) {
  ToyConfig cfg;
  cfg.seed = 5;
  const auto id = TransformId::srvf();
  std::vector<GridFunction> vs;
  for (const auto& pw : gen_power_warpings(cfg)) vs.push_back(transform_density(pw.density, id));
  const auto model = fit_fpca(vs);
  const auto& phi = model.eigenfunctions[0];
  const auto mu = Srvf::identity(phi.grid_ptr());
  const auto diag = check_image_membership(TangentVector(phi, mu));
  EXPECT_LT(diag.min_value, -1.0);
  EXPECT_FALSE(diag.pointwise_ok);
  const auto s = tangent_inverse(TangentVector(phi, mu));
  EXPECT_FALSE(s.in_positive_orthant);
  EXPECT_NO_THROW(validate_warping(srvf_inverse(s.function).function()));
}

// ---- clr and Bayes space ----

TEST(Clr, UniformGivesZero) {
  EXPECT_LT(sup_norm(clr_forward(DensityFunction::uniform(unit(11)))), 1e-15);
}

TEST(Clr, TwoTGivesLogTPlusOne) {
  const auto g = unit(201);
  const auto v = clr_forward(power_warping(g, 2.0).density);
  for (std::size_t j = 20; j < g->size(); ++j) {
    EXPECT_NEAR(v[j], std::log(g->point(j)) + 1.0, 1e-2);
  }
}

TEST(Clr, FloorIsLogged) {
  const auto g = unit(11);
  std::vector<double> f(11, 1.1);
  f[0] = 0.0;
  WarningLog log;
  const auto v = clr_forward(DensityFunction::normalize(GridFunction(g, f)), &log);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].kind, WarningKind::density_floored);
  EXPECT_TRUE(std::isfinite(v[0]));
}

TEST(ClrInverse, ConstantsGiveUniform) {
  const auto g = Grid::uniform(1.0, 3.0, 21);
  for (double c : {0.0, -4.0, 17.0}) {
    const auto f = clr_inverse(GridFunction::constant(g, c));
    for (double x : f.values()) EXPECT_NEAR(x, 1.0, 1e-14);
  }
}

TEST(ClrInverse, RoundtripAndExtremeInputs) {
  std::mt19937 rng(14);
  const auto g = unit(101);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f = random_density(rng, g);
    EXPECT_LT(sup_distance(clr_inverse(clr_forward(f)).function(), f.function()), 1e-6);
  }
  const auto big = GridFunction::sample(g, [](double t) { return 800.0 * t; });
  EXPECT_NO_THROW(clr_inverse(big));
}

TEST(Bayes, NeutralAndPowerIdentities) {
  std::mt19937 rng(15);
  const auto g = unit(101);
  const auto f = random_density(rng, g);
  const auto u = DensityFunction::uniform(g);
  EXPECT_LT(sup_distance(bayes_perturb(f, u).function(), f.function()), 1e-12);
  EXPECT_LT(sup_distance(bayes_power(1.0, f).function(), f.function()), 1e-12);
  EXPECT_LT(sup_distance(bayes_power(0.0, f).function(), u.function()), 1e-12);
}

TEST(BayesProperties, IsometryLinearityAndZeroIntegral) {
  std::mt19937 rng(16);
  std::normal_distribution<double> z(0.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = Grid::uniform(0.0, 0.5 + rep % 4, 61);
    const auto f = random_density(rng, g);
    const auto h = random_density(rng, g);
    const double oracle = bayes_inner_double_integral(f, h);
    EXPECT_NEAR(bayes_inner(f, h), oracle, 1e-6 * (1 + std::abs(oracle)));
    EXPECT_LT(sup_distance(clr_forward(bayes_perturb(f, h)), clr_forward(f) + clr_forward(h)), 1e-8);
    const double alpha = z(rng);
    EXPECT_LT(sup_distance(clr_forward(bayes_power(alpha, f)), alpha * clr_forward(f)), 1e-8);
    EXPECT_NEAR(integrate(clr_forward(f)), 0.0, 1e-8);
  }
}

// ---- log-hazard ----

TEST(LogHazard, UniformGivesMinusLogSurvival) {
  const auto g = unit(201);
  const auto h = log_hazard_forward(DensityFunction::uniform(g), 0.05);
  const std::size_t cut = hazard_cutoff_index(*g, 0.05);
  EXPECT_NEAR(g->point(cut), 0.95, 1e-12);
  for (std::size_t j = 0; j <= cut; ++j) {
    EXPECT_NEAR(h[j], -std::log(1 - g->point(j)), 1e-12);
    if (j > 0) {
      EXPECT_GT(h[j], h[j - 1]);
    }
  }
  for (std::size_t j = cut; j < g->size(); ++j) EXPECT_EQ(h[j], h[cut]);
}

TEST(LogHazard, DeltaOutOfRange) {
  const auto f = DensityFunction::uniform(unit(21));
  EXPECT_THROW(log_hazard_forward(f, 0.0), ParameterError);
  EXPECT_THROW(log_hazard_forward(f, 0.6), ParameterError);
  EXPECT_THROW(TransformId::log_hazard(-0.1), ParameterError);
  EXPECT_NO_THROW(log_hazard_forward(f, 0.5));
}

TEST(LogHazard, InverseOfUniformAndTail) {
  const auto g = unit(201);
  const auto f = DensityFunction::uniform(g);
  const auto back = log_hazard_inverse(log_hazard_forward(f, 0.05), 0.05);
  const std::size_t cut = hazard_cutoff_index(*g, 0.05);
  for (std::size_t j = 0; j <= cut; ++j) EXPECT_NEAR(back[j], 1.0, 1e-3);
  for (std::size_t j = cut + 2; j < g->size(); ++j) EXPECT_EQ(back[j], back[cut + 1]);
  EXPECT_NEAR(integrate(back.function()), 1.0, 1e-8);
}

TEST(LogHazard, TailIsConstantForAnyInput) {
  std::mt19937 rng(17);
  const auto g = Grid::uniform(0.0, 30.0, 61);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f = random_density(rng, g);
    const auto back = log_hazard_inverse(log_hazard_forward(f, 0.1), 0.1);
    const std::size_t cut = hazard_cutoff_index(*g, 0.1);
    for (std::size_t j = cut + 2; j < g->size(); ++j) EXPECT_EQ(back[j], back[cut + 1]);
    EXPECT_NEAR(integrate(back.function()), g->eta(), 1e-8 * g->eta());
  }
}

TEST(LogHazard, OverflowIsReported) {
  const auto g = unit(21);
  EXPECT_THROW(log_hazard_inverse(GridFunction::constant(g, 10.0), 0.05), HazardOverflowError);
}

// ---- log-quantile ----

TEST(LogQuantile, UniformGivesZero) {
  EXPECT_LT(sup_norm(log_quantile_forward(DensityFunction::uniform(unit(51)))), 1e-12);
}

TEST(LogQuantile, SquareWarpingMatchesClosedForm) {
  const auto g = unit(201);
  const auto u = log_quantile_forward(power_warping(g, 2.0).density);
  const auto p = u.grid().points();
  for (std::size_t j = 10; j < p.size(); ++j) {
    EXPECT_NEAR(u[j], -std::log(2 * std::sqrt(p[j])), 1e-2) << p[j];
  }
}

TEST(LogQuantile, NormConvergesUnderRefinement) {
  std::vector<double> norms;
  for (std::size_t n : {101u, 201u, 401u, 801u}) {
    norms.push_back(norm(log_quantile_forward(power_warping(unit(n), 2.0).density)));
  }
  EXPECT_LT(std::abs(norms[3] - norms[2]), std::abs(norms[2] - norms[1]));
  EXPECT_LT(std::abs(norms[2] - norms[1]), std::abs(norms[1] - norms[0]));
}

TEST(LogQuantile, FlatDistributionFunctionThrows) {
  const auto g = unit(11);
  std::vector<double> f(11, 0.0);
  f[0] = f[1] = 5.0;
  EXPECT_THROW(log_quantile_forward(DensityFunction::normalize(GridFunction(g, f))),
               QuantileInversionError);
}

TEST(LogQuantileInverse, ZeroGivesUniform) {
  const auto g = unit(51);
  const auto f = log_quantile_inverse(GridFunction::constant(probability_grid(51), 0.0), g);
  for (double x : f.values()) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(LogQuantileInverse, TwoTRoundtrip) {
  const auto g = unit(201);
  const auto pw = power_warping(g, 2.0);
  const auto u = log_quantile_forward(pw.density);
  EXPECT_LT(sup_distance(log_quantile_inverse_warping(u, g).function(), pw.gamma.function()), 5e-2);
  // The first probability cell spans t in [0, 0.07], so the density is only
  // resolved away from t = 0.
  const auto back = log_quantile_inverse(u, g);
  for (std::size_t j = 20; j < g->size(); ++j) EXPECT_NEAR(back[j], pw.density[j], 5e-2);
}

TEST(LogQuantileInverse, AlwaysAValidDensity) {
  std::mt19937 rng(18);
  std::normal_distribution<double> z(0.0, 3.0);
  const auto g = Grid::uniform(-1.0, 1.0, 41);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> u(41);
    for (auto& x : u) x = z(rng);
    const auto f = log_quantile_inverse(GridFunction(probability_grid(41), u), g);
    EXPECT_NO_THROW(DensityFunction::validate(f.function()));
  }
}

// ---- unified transforms ----

TEST(Transform, IdentityUnderClr) {
  const auto g = unit(41);
  const auto id = TransformId::clr();
  EXPECT_LT(sup_norm(transform(WarpingFunction::identity(g), id)), 1e-12);
  const auto back = inverse_transform(GridFunction::constant(g, 0.0), id, g);
  EXPECT_LT(sup_distance(back.function(), WarpingFunction::identity(g).function()), 1e-14);
}

TEST(Transform, ClrIsOntoZeroIntegralFunctions) {
  std::mt19937 rng(19);
  std::normal_distribution<double> z;
  const auto g = unit(201);
  const auto id = TransformId::clr();
  for (int rep = 0; rep < 20; ++rep) {
    const double c1 = z(rng), c2 = z(rng);
    GridFunction v = GridFunction::sample(g, [&](double t) { return c1 * std::sin(5 * t) + c2 * t * t; });
    v = v - GridFunction::constant(g, integrate(v));
    // Exact up to the discretization of D.
    const auto again = transform(inverse_transform(v, id, g), id);
    EXPECT_LT(sup_distance(again, v), 1e-4);
  }
}

TEST(Transform, ToyEigenfunctionBackTransformsThroughNegativeSrvf) {
  ToyConfig cfg;
  cfg.seed = 9;
  const auto id = TransformId::srvf();
  std::vector<GridFunction> vs;
  for (const auto& pw : gen_power_warpings(cfg)) vs.push_back(transform_density(pw.density, id));
  const auto phi = fit_fpca(vs).eigenfunctions[0];
  const auto s = tangent_inverse(TangentVector(phi, id.reference(phi.grid_ptr())));
  EXPECT_LT(s.function.min(), 0.0);
  EXPECT_NO_THROW(inverse_transform(phi, id, phi.grid_ptr()));
}

TEST(TransformProperties, InverseAlwaysGivesValidWarping) {
  std::mt19937 rng(20);
  std::normal_distribution<double> z;
  const auto g = unit(101);
  const auto mu = Srvf::identity(g);
  for (int rep = 0; rep < 100; ++rep) {
    const double c1 = z(rng), c2 = z(rng), c3 = z(rng);
    const GridFunction v = GridFunction::sample(g, [&](double t) {
      return c1 + c2 * std::cos(4 * t) + c3 * t;
    });
    EXPECT_NO_THROW(inverse_transform(v, TransformId::clr(), g));
    EXPECT_NO_THROW(inverse_transform(v, TransformId::log_hazard(), g));
    EXPECT_NO_THROW(inverse_transform(v.with_values({v.values().begin(), v.values().end()}),
                                      TransformId::log_quantile(), g));
    const GridFunction tv = random_tangent(rng, mu, std::abs(z(rng)) * 2);
    EXPECT_NO_THROW(inverse_transform(tv, TransformId::srvf(), g));
  }
}

TEST(TransformProperties, RoundtripOnPowerFamily) {
  const auto check = [](const TransformId& id, double tol) {
    for (double k = 0.3; k <= 3.0 + 1e-9; k += 0.1) {
      double prev = INFINITY;
      for (std::size_t n : {201u, 401u}) {
        const auto g = unit(n);
        const auto gam = power_warping(g, k).gamma;
        const auto back = inverse_transform(transform(gam, id), id, g);
        std::size_t last = n - 1;
        if (id.kind == TransformKind::log_hazard) last = hazard_cutoff_index(*g, id.delta);
        double err = 0.0;
        for (std::size_t j = 0; j <= last; ++j) err = std::max(err, std::abs(back[j] - gam[j]));
        EXPECT_LT(err, tol) << to_string(id.kind) << " k=" << k << " n=" << n;
        // Below 1e-12 both grids are at roundoff and no ordering is expected.
        EXPECT_TRUE(err < prev || std::max(err, prev) < 1e-12)
            << to_string(id.kind) << " k=" << k << " n=" << n << " err=" << err;
        prev = err;
      }
    }
  };
  check(TransformId::clr(), 1e-3);
  check(TransformId::srvf(), 1e-3);
  check(TransformId::log_hazard(), 5e-2);
  check(TransformId::log_quantile(), 5e-2);
}

TEST(TransformId, ParseAndPrint) {
  for (auto k : {TransformKind::srvf_tangent, TransformKind::clr, TransformKind::log_hazard,
                 TransformKind::log_quantile}) {
    EXPECT_EQ(parse_transform_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_transform_kind("fisher-rao"), ParameterError);
}
