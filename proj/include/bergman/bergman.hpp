#pragma once

#include "bergman/comparison.hpp"
#include "bergman/error.hpp"
#include "bergman/gauss_legendre.hpp"
#include "bergman/homotopy.hpp"
#include "bergman/kernel.hpp"
#include "bergman/measure.hpp"
#include "bergman/quantization.hpp"
#include "bergman/span.hpp"
#include "bergman/types.hpp"
#include "bergman/version.hpp"
#include "bergman/weight.hpp"
