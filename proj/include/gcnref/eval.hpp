#ifndef GCNREF_EVAL_HPP
#define GCNREF_EVAL_HPP

#include <string>
#include <vector>

#include "gcnref/volume.hpp"

namespace gcnref {

enum class Axis { X, Y, Z };

struct DiceReport {
    double volume_dice = 0.0;
    std::vector<double> slice_dice;  // slices where either mask is non-empty
};

struct KsResult {
    double statistic = 0.0;  // sup |F1 - F2| over the pooled sample points
    double p_value = 1.0;    // asymptotic Kolmogorov distribution
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

// 2|a^b| / (|a|+|b|); 1.0 when both masks are empty.
double dice(const Volume& a, const Volume& b);

// Per-slice dice along `axis`, skipping slices empty in both masks.
std::vector<double> slicewise_dice(const Volume& a, const Volume& b, Axis axis = Axis::Z);

DiceReport dice_report(const Volume& prediction, const Volume& ground_truth,
                       Axis axis = Axis::Z);

// Two-sample KS test; asymptotic p-value from the Kolmogorov series
// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2), truncated when
// terms drop below 1e-12, p clipped to [0,1]. Asymptotic only: do not trust
// p for sample sizes below ~25.
KsResult ks_test(const std::vector<double>& sample1, const std::vector<double>& sample2);

// (gcn_dsc - expectation_dsc) / expectation_dsc * 100.
double relative_improvement(double gcn_dsc, double expectation_dsc);

// Significance marks: "**" p<0.01, "*" p<0.05, "" otherwise.
std::string significance_stars(double p_value);

}  // namespace gcnref

#endif
