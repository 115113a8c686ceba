#pragma once

#include "bandlab/band.hpp"
#include "bandlab/boundary.hpp"
#include "bandlab/errors.hpp"
#include "bandlab/experiments.hpp"
#include "bandlab/h2.hpp"
#include "bandlab/io.hpp"
#include "bandlab/metric_core.hpp"
#include "bandlab/metric_tree.hpp"
#include "bandlab/model_space.hpp"
#include "bandlab/parallel.hpp"
#include "bandlab/random.hpp"
#include "bandlab/rough.hpp"
