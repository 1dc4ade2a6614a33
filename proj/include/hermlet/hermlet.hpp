#pragma once

#include "hermlet/embedding.hpp"
#include "hermlet/errors.hpp"
#include "hermlet/expansion.hpp"
#include "hermlet/frames.hpp"
#include "hermlet/hermite.hpp"
#include "hermlet/lpw.hpp"
#include "hermlet/multiindex.hpp"
#include "hermlet/multiplier.hpp"
#include "hermlet/norms.hpp"
#include "hermlet/parallel.hpp"
#include "hermlet/report.hpp"
#include "hermlet/rng.hpp"
#include "hermlet/tiles.hpp"
#include "hermlet/weights.hpp"
