#pragma once

#include "nasgraph/cellgraph.hpp"
#include "nasgraph/dataset.hpp"
#include "nasgraph/embeddings.hpp"
#include "nasgraph/error.hpp"
#include "nasgraph/gcn.hpp"
#include "nasgraph/proxies/counters.hpp"
#include "nasgraph/proxies/frame.hpp"
#include "nasgraph/proxies/rank.hpp"
#include "nasgraph/search.hpp"
