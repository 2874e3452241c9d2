#ifndef MLCORE_MLCORE_HPP
#define MLCORE_MLCORE_HPP

#include "mlcore/bench.hpp"
#include "mlcore/cover_tree.hpp"
#include "mlcore/csv.hpp"
#include "mlcore/errors.hpp"
#include "mlcore/hrect_bound.hpp"
#include "mlcore/kdtree.hpp"
#include "mlcore/kmeans.hpp"
#include "mlcore/matrix.hpp"
#include "mlcore/metrics.hpp"
#include "mlcore/neighbor_search.hpp"
#include "mlcore/range_search.hpp"
#include "mlcore/rng.hpp"
#include "mlcore/sort_policy.hpp"

#endif  // MLCORE_MLCORE_HPP
