#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace corrnet {

enum class LeveneCenter { Mean, Median };

std::string to_string(LeveneCenter center);
/// "mean" or "median"; throws ValidationError otherwise.
LeveneCenter parse_center(const std::string& text);

struct TestReport {
    double statistic = 0.0;
    std::size_t df1 = 0; ///< groups - 1
    std::size_t df2 = 0; ///< observations - groups
    double p_value = 1.0;
    std::optional<LeveneCenter> center; ///< set by `levene` only
};

/// I_x(a, b) for a, b > 0 and x in [0, 1], by continued fraction with the
/// symmetry switch. Throws NumericalError if the fraction fails to converge.
double regularized_incomplete_beta(double a, double b, double x);

/// P(F >= f) for F ~ F(df1, df2): I_x(df2/2, df1/2) with x = df2 / (df2 + df1 f).
double f_upper_tail(double f, double df1, double df2);

/// One-way ANOVA. Needs >= 2 groups of >= 2 observations. When every group is
/// constant but the means differ, F is infinite and p = 0; when all
/// observations are equal F is undefined and ValidationError is thrown.
TestReport anova_oneway(const std::vector<std::vector<double>>& groups);

/// Levene's test: ANOVA on |x - centre(group)|. Median centring is the
/// Brown-Forsythe variant. If every absolute deviation is the same the
/// spreads are exactly equal and W = 0, p = 1.
TestReport levene(const std::vector<std::vector<double>>& groups, LeveneCenter center = LeveneCenter::Median);

} // namespace corrnet
