#pragma once

#include "kaczmarz/errors.hpp"
#include "kaczmarz/experiment.hpp"
#include "kaczmarz/io.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/problems.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/solvers.hpp"
#include "kaczmarz/theory.hpp"
