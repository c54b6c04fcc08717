#pragma once

#include "rkhs/decomp.hpp"
#include "rkhs/dynamics.hpp"
#include "rkhs/error.hpp"
#include "rkhs/estimators.hpp"
#include "rkhs/experiments.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/linalg.hpp"
#include "rkhs/operator.hpp"
#include "rkhs/report.hpp"
