#pragma once

#include "illposed/baselines.hpp"
#include "illposed/bench.hpp"
#include "illposed/diagnostics.hpp"
#include "illposed/dictionary.hpp"
#include "illposed/laguerre.hpp"
#include "illposed/lasso.hpp"
#include "illposed/model_select.hpp"
#include "illposed/precondition.hpp"
#include "illposed/problem.hpp"
#include "illposed/wavelet.hpp"
