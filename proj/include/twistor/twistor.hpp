#pragma once

#include "twistor/cocycle.hpp"
#include "twistor/error.hpp"
#include "twistor/grid.hpp"
#include "twistor/io.hpp"
#include "twistor/laurent.hpp"
#include "twistor/matrix.hpp"
#include "twistor/parallel.hpp"
#include "twistor/penrose_ward.hpp"
#include "twistor/pipeline.hpp"
#include "twistor/polynomial.hpp"
#include "twistor/riemann_hilbert.hpp"
#include "twistor/scenario.hpp"
#include "twistor/sdym_field.hpp"
#include "twistor/symmetry.hpp"
#include "twistor/twistor_cover.hpp"
