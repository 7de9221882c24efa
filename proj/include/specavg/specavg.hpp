#pragma once

#include "specavg/errors.hpp"
#include "specavg/numeric.hpp"
#include "specavg/quadrature.hpp"
#include "specavg/measure.hpp"
#include "specavg/transform.hpp"
#include "specavg/operator.hpp"
#include "specavg/averaging.hpp"
#include "specavg/continuity.hpp"
#include "specavg/io.hpp"
#include "specavg/cli.hpp"
