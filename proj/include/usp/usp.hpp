#pragma once

#include "usp/asymptotics.hpp"
#include "usp/datasets.hpp"
#include "usp/error.hpp"
#include "usp/estimators.hpp"
#include "usp/io.hpp"
#include "usp/parallel.hpp"
#include "usp/permutation.hpp"
#include "usp/random.hpp"
#include "usp/simulation.hpp"
#include "usp/special_functions.hpp"
#include "usp/table.hpp"
