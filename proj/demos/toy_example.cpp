// Power warpings t^k with k ~ Ga(5, 5): FPCA in the SRVF tangent space and
// in clr coordinates, and the rank-one reconstruction of a held-out warping.

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "warpfda/warpfda.hpp"

int main(int argc, char** argv) {
  using namespace warpfda;
  ToyConfig cfg;
  cfg.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;

  const auto warpings = gen_power_warpings(cfg);
  const auto heldout = power_warping(cfg.grid(), default_heldout_k);

  for (const auto& id : {TransformId::srvf(), TransformId::clr()}) {
    std::vector<GridFunction> vs;
    for (const auto& w : warpings) {
      vs.push_back(transform_density(w.density, id));
    }
    const FpcaModel model = fit_fpca(vs);
    double total = 0.0;
    for (double l : model.eigenvalues) total += l;

    const auto scores = project_scores(model, transform_density(heldout.density, id));
    const WarpingFunction rec =
        inverse_transform(reconstruct(model, scores, 1), id, heldout.gamma.grid_ptr());
    const double err = norm(rec.function() - heldout.gamma.function()) /
                       norm(heldout.gamma.function());

    std::printf("%-5s lambda1 = %.4f  share = %.1f%%  min phi1 = %+.3f  heldout error = %.4f\n",
                std::string(to_string(id.kind)).c_str(), model.eigenvalues[0],
                100.0 * model.eigenvalues[0] / total, model.eigenfunctions[0].min(), err);
  }
  return 0;
}
