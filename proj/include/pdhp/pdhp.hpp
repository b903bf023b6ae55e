#pragma once

#include "pdhp/evaluation.hpp"
#include "pdhp/hawkes.hpp"
#include "pdhp/io.hpp"
#include "pdhp/kernels.hpp"
#include "pdhp/math.hpp"
#include "pdhp/prior.hpp"
#include "pdhp/rng.hpp"
#include "pdhp/smc.hpp"
#include "pdhp/synthgen.hpp"
#include "pdhp/text.hpp"
