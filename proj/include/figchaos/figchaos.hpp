#pragma once

#include "figchaos/corr_dim.hpp"
#include "figchaos/csv.hpp"
#include "figchaos/embedding.hpp"
#include "figchaos/figarch.hpp"
#include "figchaos/fnn.hpp"
#include "figchaos/lyapunov.hpp"
#include "figchaos/mutual_info.hpp"
#include "figchaos/neighbors.hpp"
#include "figchaos/pipeline.hpp"
#include "figchaos/rng.hpp"
#include "figchaos/stats.hpp"
#include "figchaos/types.hpp"
