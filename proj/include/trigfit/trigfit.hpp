#pragma once

#include "trigfit/audio.hpp"
#include "trigfit/error.hpp"
#include "trigfit/expression.hpp"
#include "trigfit/exprgen.hpp"
#include "trigfit/featurize.hpp"
#include "trigfit/linreg.hpp"
#include "trigfit/random.hpp"
#include "trigfit/sinefit.hpp"
