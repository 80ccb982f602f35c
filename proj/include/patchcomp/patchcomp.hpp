#pragma once

#include "patchcomp/landscape.hpp"
#include "patchcomp/tridiagonal.hpp"
#include "patchcomp/grid.hpp"
#include "patchcomp/diffusion.hpp"
#include "patchcomp/transform.hpp"
#include "patchcomp/steady.hpp"
#include "patchcomp/eigen.hpp"
#include "patchcomp/dynamics.hpp"
#include "patchcomp/identities.hpp"
#include "patchcomp/invasion.hpp"
#include "patchcomp/config.hpp"
#include "patchcomp/validation.hpp"
