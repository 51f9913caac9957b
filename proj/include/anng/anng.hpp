#pragma once

#include "anng/error.hpp"
#include "anng/experiment.hpp"
#include "anng/geometry.hpp"
#include "anng/graph.hpp"
#include "anng/instance.hpp"
#include "anng/io.hpp"
#include "anng/random.hpp"
#include "anng/search.hpp"
#include "anng/tradeoffs.hpp"
#include "anng/vector.hpp"
