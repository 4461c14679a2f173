#pragma once

#include "csv.hpp"
#include "data.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "lasso.hpp"
#include "parallel.hpp"
#include "resampling.hpp"
#include "rng.hpp"
#include "selection.hpp"
#include "stability.hpp"
