#pragma once

#include "blaschke/error.hpp"
#include "blaschke/jet.hpp"
#include "blaschke/polynomial.hpp"
#include "blaschke/funcexpr.hpp"
#include "blaschke/quadrature.hpp"
#include "blaschke/modelspace.hpp"
#include "blaschke/norms.hpp"
#include "blaschke/quotient.hpp"
#include "blaschke/extremal.hpp"
