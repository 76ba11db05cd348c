#pragma once

#include "monosplit/composite.hpp"
#include "monosplit/errors.hpp"
#include "monosplit/linalg.hpp"
#include "monosplit/operators.hpp"
#include "monosplit/run.hpp"
#include "monosplit/sampling.hpp"
#include "monosplit/splitting.hpp"
#include "monosplit/stepsize.hpp"
