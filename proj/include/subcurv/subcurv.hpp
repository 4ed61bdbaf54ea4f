#pragma once

#include "subcurv/connection.hpp"
#include "subcurv/core.hpp"
#include "subcurv/curvature.hpp"
#include "subcurv/fd.hpp"
#include "subcurv/fixtures.hpp"
#include "subcurv/linalg.hpp"
#include "subcurv/ode.hpp"
#include "subcurv/path.hpp"
#include "subcurv/polynomial.hpp"
#include "subcurv/supplement.hpp"
#include "subcurv/transport.hpp"
#include "subcurv/variation.hpp"
