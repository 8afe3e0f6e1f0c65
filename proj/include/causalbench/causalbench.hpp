#pragma once

#include "causalbench/algorithms/registry.hpp"
#include "causalbench/dataset.hpp"
#include "causalbench/generators.hpp"
#include "causalbench/graph.hpp"
#include "causalbench/graph_io.hpp"
#include "causalbench/metrics/shd.hpp"
#include "causalbench/sem.hpp"
