#pragma once

#include "latmap/classify.hpp"
#include "latmap/closed_form.hpp"
#include "latmap/consistency.hpp"
#include "latmap/errors.hpp"
#include "latmap/faces.hpp"
#include "latmap/gauge.hpp"
#include "latmap/map_family.hpp"
#include "latmap/matrix.hpp"
#include "latmap/monomial.hpp"
#include "latmap/polynomial.hpp"
#include "latmap/rational.hpp"
