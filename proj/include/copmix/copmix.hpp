#ifndef COPMIX_COPMIX_HPP
#define COPMIX_COPMIX_HPP

// Convenience umbrella header pulling in the whole library.

#include "copmix/normal.hpp"
#include "copmix/rng.hpp"
#include "copmix/mesh_ecdf.hpp"
#include "copmix/bshqi.hpp"
#include "copmix/stat_tests.hpp"
#include "copmix/optim.hpp"
#include "copmix/copulas.hpp"
#include "copmix/mixture.hpp"
#include "copmix/datagen.hpp"
#include "copmix/metrics.hpp"
#include "copmix/serialize.hpp"

#endif
