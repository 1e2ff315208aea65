#pragma once

// Umbrella header. oracle.hpp, verify.hpp and commands.hpp need GMP and MPFR
// at link time; everything else is self-contained.

#include "urnent/errors.hpp"
#include "urnent/numerics.hpp"
#include "urnent/urn_spec.hpp"
#include "urnent/urn.hpp"
#include "urnent/divergence.hpp"
#include "urnent/bounds.hpp"
#include "urnent/definetti.hpp"
#include "urnent/parallel.hpp"
#include "urnent/io.hpp"
#include "urnent/oracle.hpp"
#include "urnent/verify.hpp"
