#pragma once

// Seeded generators for the power-warping toy family and a companion
// amplitude model. Uniforms come from Philox4x32-10, so a seed reproduces the
// same draws on every platform.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "warpfda/error.hpp"
#include "warpfda/grid_function.hpp"
#include "warpfda/joint_pca.hpp"
#include "warpfda/transforms.hpp"
#include "warpfda/warping.hpp"

namespace warpfda {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
public:
  using Block = std::array<std::uint32_t, 4>;

  static Block generate(Block counter, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * counter[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0],
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1],
                 static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }
};

/// Sequential draws from Philox keyed by the seed; `stream` selects an
/// independent substream through the high counter word.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint32_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint32_t next_u32() {
    if (used_ == 4) {
      block_ = Philox4x32::generate({static_cast<std::uint32_t>(counter_),
                                     static_cast<std::uint32_t>(counter_ >> 32), 0u, stream_},
                                    key_);
      ++counter_;
      used_ = 0;
    }
    return block_[used_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32() >> 5;  // 27 bits
    const std::uint64_t lo = next_u32() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_positive() { return 1.0 - uniform(); }

  /// Standard normal by Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_positive()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  /// Gamma(shape, rate) by Marsaglia-Tsang; shape < 1 uses the U^{1/shape}
  /// boost of a Gamma(shape + 1) draw.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double boost = std::pow(uniform_positive(), 1.0 / shape);
      return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_positive();
      if (u < 1.0 - 0.0331 * x * x * x * x ||
          std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v / rate;
      }
    }
  }

private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Block block_{};
  std::size_t used_ = 4;
  std::optional<double> spare_;
};

inline void validate_gamma_parameters(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw ParameterError("Gamma shape and rate must be positive and finite");
  }
}

inline std::vector<double> gamma_sample(double shape, double rate, std::uint64_t seed,
                                        std::size_t n) {
  validate_gamma_parameters(shape, rate);
  RandomStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& x : out) {
    x = rng.gamma(shape, rate);
  }
  return out;
}

struct ToyConfig {
  std::size_t n = 50;
  double shape = 5.0;
  double rate = 5.0;
  std::size_t grid_size = 201;
  std::uint64_t seed = 0;
  double a = 0.0;
  double b = 1.0;

  void validate() const {
    validate_gamma_parameters(shape, rate);
    if (n < 1) {
      throw ParameterError("toy config needs n >= 1");
    }
    if (grid_size < Grid::min_size) {
      throw ParameterError("toy config needs grid_size >= 3");
    }
    if (!(b > a)) {
      throw ParameterError("toy config needs a < b");
    }
  }

  GridPtr grid() const { return Grid::uniform(a, b, grid_size); }
};

inline constexpr double default_heldout_k = 2.5;

struct PowerWarping {
  double k;
  WarpingFunction gamma;
  /// k s^{k-1} in rescaled time s = (t - a) / eta, normalized to mass eta.
  DensityFunction density;
};

/// gamma(t) = a + eta * s^k with its analytic density. At t = a the closed
/// form is 0 or unbounded, so the first node takes the value at the midpoint
/// of the first cell.
inline PowerWarping power_warping(const GridPtr& grid, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw ParameterError("power warping needs k > 0, got " + std::to_string(k));
  }
  const double a = grid->a();
  const double eta = grid->eta();
  const std::size_t n = grid->size();
  std::vector<double> values(n);
  std::vector<double> dens(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = (grid->point(j) - a) / eta;
    values[j] = a + eta * std::pow(s, k);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (j == 0) ? 0.5 * (grid->point(0) + grid->point(1)) : grid->point(j);
    dens[j] = k * std::pow((t - a) / eta, k - 1.0);
  }
  return PowerWarping{k, WarpingFunction::from_monotone(grid, std::move(values)),
                      DensityFunction::normalize(GridFunction(grid, std::move(dens)))};
}

inline std::vector<PowerWarping> gen_power_warpings(const ToyConfig& cfg) {
  cfg.validate();
  const GridPtr grid = cfg.grid();
  std::vector<PowerWarping> out;
  out.reserve(cfg.n);
  for (double k : gamma_sample(cfg.shape, cfg.rate, cfg.seed, cfg.n)) {
    out.push_back(power_warping(grid, k));
  }
  return out;
}

/// Registered functions w_i(t) = (1 + a_i) sin(2 pi (t - a) / eta) with
/// a_i ~ N(0, sd^2). `warp = false` gives identity warpings.
struct AmplitudeSpec {
  double sd = 0.1;
  bool warp = true;
};

inline std::vector<JointSample> gen_toy_joint(const ToyConfig& cfg, const AmplitudeSpec& amp,
                                              const TransformId& id) {
  cfg.validate();
  if (!(amp.sd >= 0.0)) {
    throw ParameterError("amplitude sd must be nonnegative");
  }
  const GridPtr grid = cfg.grid();
  RandomStream rng(cfg.seed, 1);
  const std::vector<double> ks = gamma_sample(cfg.shape, cfg.rate, cfg.seed, cfg.n);
  std::vector<JointSample> out;
  out.reserve(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double scale = 1.0 + amp.sd * rng.normal();
    GridFunction w = GridFunction::sample(grid, [&](double t) {
      return scale * std::sin(2.0 * std::numbers::pi * (t - cfg.a) / (cfg.b - cfg.a));
    });
    WarpingFunction gamma =
        amp.warp ? power_warping(grid, ks[i]).gamma : WarpingFunction::identity(grid);
    out.push_back(JointSample::make(std::move(w), std::move(gamma), id));
  }
  return out;
}

}  // namespace warpfda
