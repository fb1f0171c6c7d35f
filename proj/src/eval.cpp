#include "gcnref/eval.hpp"

#include <algorithm>
#include <cmath>

#include "gcnref/errors.hpp"

namespace gcnref {

namespace {

double dice_from_counts(std::size_t inter, std::size_t a, std::size_t b) {
    if (a + b == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

void check_binary_pair(const Volume& a, const Volume& b, const char* who) {
    if (a.dims != b.dims) throw ValidationError(std::string(who) + ": dims mismatch");
    validate(a);
    validate(b);
}

}  // namespace

double dice(const Volume& a, const Volume& b) {
    check_binary_pair(a, b, "dice");
    std::size_t inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool fa = a.data[i] != 0.0f;
        const bool fb = b.data[i] != 0.0f;
        na += fa;
        nb += fb;
        inter += fa && fb;
    }
    return dice_from_counts(inter, na, nb);
}

std::vector<double> slicewise_dice(const Volume& a, const Volume& b, Axis axis) {
    check_binary_pair(a, b, "slicewise_dice");
    const Dims d = a.dims;
    const int slices = axis == Axis::X ? d.nx : axis == Axis::Y ? d.ny : d.nz;

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(slices));
    for (int s = 0; s < slices; ++s) {
        std::size_t inter = 0, na = 0, nb = 0;
        auto visit = [&](int x, int y, int z) {
            const auto i = a.index(x, y, z);
            const bool fa = a.data[i] != 0.0f;
            const bool fb = b.data[i] != 0.0f;
            na += fa;
            nb += fb;
            inter += fa && fb;
        };
        if (axis == Axis::X) {
            for (int z = 0; z < d.nz; ++z)
                for (int y = 0; y < d.ny; ++y) visit(s, y, z);
        } else if (axis == Axis::Y) {
            for (int z = 0; z < d.nz; ++z)
                for (int x = 0; x < d.nx; ++x) visit(x, s, z);
        } else {
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) visit(x, y, s);
        }
        if (na + nb == 0) continue;  // slices empty on both sides carry no signal
        out.push_back(dice_from_counts(inter, na, nb));
    }
    return out;
}

DiceReport dice_report(const Volume& prediction, const Volume& ground_truth, Axis axis) {
    DiceReport report;
    report.volume_dice = dice(prediction, ground_truth);
    report.slice_dice = slicewise_dice(prediction, ground_truth, axis);
    return report;
}

KsResult ks_test(const std::vector<double>& sample1, const std::vector<double>& sample2) {
    if (sample1.empty() || sample2.empty())
        throw ValidationError("ks_test needs non-empty samples");

    std::vector<double> s1 = sample1, s2 = sample2;
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());

    // sweep the merged order; the ECDF gap can only change at sample points
    const double n1 = static_cast<double>(s1.size());
    const double n2 = static_cast<double>(s2.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < s1.size() && j < s2.size()) {
        const double v = std::min(s1[i], s2[j]);
        while (i < s1.size() && s1[i] <= v) ++i;
        while (j < s2.size() && s2[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }

    KsResult result;
    result.statistic = d;
    result.n1 = s1.size();
    result.n2 = s2.size();

    const double lambda = d * std::sqrt(n1 * n2 / (n1 + n2));
    if (lambda < 1e-6) {
        result.p_value = 1.0;
        return result;
    }
    double sum = 0.0;
    for (int term = 1; term <= 100000; ++term) {
        const double t = std::exp(-2.0 * term * term * lambda * lambda);
        if (t < 1e-12) break;
        sum += (term % 2 == 1) ? t : -t;
    }
    result.p_value = std::min(1.0, std::max(0.0, 2.0 * sum));
    return result;
}

double relative_improvement(double gcn_dsc, double expectation_dsc) {
    if (expectation_dsc <= 0.0)
        throw ValidationError("relative improvement needs a positive baseline dice");
    return (gcn_dsc - expectation_dsc) / expectation_dsc * 100.0;
}

std::string significance_stars(double p_value) {
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    return "";
}

}  // namespace gcnref
