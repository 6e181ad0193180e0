#pragma once

#include "nsmod/analytic.hpp"
#include "nsmod/direction.hpp"
#include "nsmod/error.hpp"
#include "nsmod/fem/mesh.hpp"
#include "nsmod/fem/obstacle.hpp"
#include "nsmod/fem/operators.hpp"
#include "nsmod/min_norm.hpp"
#include "nsmod/problem.hpp"
#include "nsmod/sampling.hpp"
#include "nsmod/solver.hpp"
#include "nsmod/space.hpp"
