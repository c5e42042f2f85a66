#pragma once

#include "warpfda/error.hpp"
#include "warpfda/grid_function.hpp"
#include "warpfda/warping.hpp"
#include "warpfda/transforms.hpp"
#include "warpfda/fpca.hpp"
#include "warpfda/golden_section.hpp"
#include "warpfda/joint_pca.hpp"
#include "warpfda/synthgen.hpp"
#include "warpfda/csv.hpp"
#include "warpfda/pipeline.hpp"
