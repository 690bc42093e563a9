#pragma once

#include <vector>

#include "gmsplit/errors.hpp"

namespace gmsplit {

// average fractional ranks, ties shared (1-based)
std::vector<double> fractional_ranks(const std::vector<double>& xs);

// Spearman rank correlation: Pearson over average-fractional ranks. Throws
// StatsError on length mismatch, fewer than two points, or zero rank variance.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

double mean(const std::vector<double>& xs);
double stddev(const std::vector<double>& xs);  // population

}  // namespace gmsplit
