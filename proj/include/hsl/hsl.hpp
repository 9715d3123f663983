#pragma once

#include <hsl/statespace.hpp>
#include <hsl/oracles.hpp>
#include <hsl/parallel.hpp>
#include <hsl/runner.hpp>
#include <hsl/baselines.hpp>
#include <hsl/progress.hpp>
#include <hsl/optimizer.hpp>
