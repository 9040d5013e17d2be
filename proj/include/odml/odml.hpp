#pragma once

#include "odml/errors.hpp"
#include "odml/estimate.hpp"
#include "odml/filter.hpp"
#include "odml/inference.hpp"
#include "odml/invertibility.hpp"
#include "odml/io.hpp"
#include "odml/math/rng.hpp"
#include "odml/math/special.hpp"
#include "odml/model.hpp"
#include "odml/region.hpp"
#include "odml/simulate.hpp"
