#pragma once

#include "l1ac/error.hpp"
#include "l1ac/statespace.hpp"
#include "l1ac/polynomial.hpp"
#include "l1ac/plant.hpp"
#include "l1ac/augmentation.hpp"
#include "l1ac/engine.hpp"
#include "l1ac/metrics.hpp"
#include "l1ac/csv.hpp"
#include "l1ac/plot.hpp"
#include "l1ac/scenario.hpp"
