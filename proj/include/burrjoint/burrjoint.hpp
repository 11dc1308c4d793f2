#pragma once

#include "burrjoint/error.hpp"
#include "burrjoint/numeric.hpp"
#include "burrjoint/random.hpp"
#include "burrjoint/model.hpp"
#include "burrjoint/data.hpp"
#include "burrjoint/sample_io.hpp"
#include "burrjoint/fit_mle.hpp"
#include "burrjoint/fit_bayes.hpp"
#include "burrjoint/shrink.hpp"
#include "burrjoint/predict.hpp"
#include "burrjoint/mcstudy.hpp"
