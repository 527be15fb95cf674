#pragma once

#include "hamkrr/config.hpp"
#include "hamkrr/dynamics.hpp"
#include "hamkrr/estimator.hpp"
#include "hamkrr/experiments.hpp"
#include "hamkrr/finite_difference.hpp"
#include "hamkrr/geometry.hpp"
#include "hamkrr/kernels.hpp"
#include "hamkrr/pipeline.hpp"
#include "hamkrr/sampling.hpp"
#include "hamkrr/systems.hpp"
#include "hamkrr/types.hpp"
