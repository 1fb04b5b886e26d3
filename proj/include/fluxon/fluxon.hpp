#pragma once

#include "fluxon/bessel.hpp"
#include "fluxon/checks.hpp"
#include "fluxon/common.hpp"
#include "fluxon/expansion.hpp"
#include "fluxon/geometry.hpp"
#include "fluxon/halfspace.hpp"
#include "fluxon/patches.hpp"
#include "fluxon/quadrature.hpp"
#include "fluxon/sphere_oracle.hpp"
#include "fluxon/verification.hpp"
