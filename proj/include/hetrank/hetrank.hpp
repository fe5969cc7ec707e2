#pragma once

#include "hetrank/crowd.hpp"
#include "hetrank/csv_io.hpp"
#include "hetrank/dataset.hpp"
#include "hetrank/errors.hpp"
#include "hetrank/estimators.hpp"
#include "hetrank/experiments.hpp"
#include "hetrank/grid.hpp"
#include "hetrank/loss.hpp"
#include "hetrank/metrics.hpp"
#include "hetrank/noise.hpp"
#include "hetrank/optimizer.hpp"
#include "hetrank/simulator.hpp"
