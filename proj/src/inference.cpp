#include "corrnet/inference.hpp"

#include "corrnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace corrnet {

std::string to_string(LeveneCenter center)
{
    return center == LeveneCenter::Mean ? "mean" : "median";
}

LeveneCenter parse_center(const std::string& text)
{
    if (text == "mean")
        return LeveneCenter::Mean;
    if (text == "median")
        return LeveneCenter::Median;
    throw ValidationError("Levene centre must be mean or median, got '" + text + "'");
}

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxTerms = 20000;

/// Continued fraction for I_x(a, b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_fraction(double a, double b, double x)
{
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny)
        d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxTerms; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny)
            d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny)
            c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

/// I_x(a, b) given both x and y = 1 - x, so callers can supply an exact y.
double incomplete_beta(double a, double b, double x, double y)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw ValidationError("incomplete beta needs positive parameters");
    if (x <= 0.0)
        return 0.0;
    if (y <= 0.0)
        return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, y) / b;
}

struct Anova {
    double ssb = 0.0;
    double ssw = 0.0;
    double sst = 0.0;
    double sum_sq = 0.0;
    std::size_t df1 = 0;
    std::size_t df2 = 0;
};

Anova sums_of_squares(const std::vector<std::vector<double>>& groups)
{
    if (groups.size() < 2)
        throw ValidationError("at least two groups are required");
    Anova r;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& g : groups) {
        if (g.size() < 2)
            throw ValidationError("every group needs at least two observations");
        for (double x : g) {
            if (!std::isfinite(x))
                throw ValidationError("observations must be finite");
            total += x;
            r.sum_sq += x * x;
        }
        count += g.size();
    }
    const double grand = total / static_cast<double>(count);
    for (const auto& g : groups) {
        double s = 0.0;
        for (double x : g)
            s += x;
        const double mean = s / static_cast<double>(g.size());
        r.ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double x : g) {
            r.ssw += (x - mean) * (x - mean);
            r.sst += (x - grand) * (x - grand);
        }
    }
    r.df1 = groups.size() - 1;
    r.df2 = count - groups.size();
    return r;
}

/// Squared relative precision below which a sum of squares counts as zero.
constexpr double kZeroSq = 1e-26;

bool all_equal(const Anova& a)
{
    return a.sst <= kZeroSq * a.sum_sq;
}

TestReport finish(const Anova& a)
{
    TestReport t;
    t.df1 = a.df1;
    t.df2 = a.df2;
    if (a.ssw <= kZeroSq * a.sst) {
        t.statistic = std::numeric_limits<double>::infinity();
        t.p_value = 0.0;
        return t;
    }
    t.statistic = (a.ssb / static_cast<double>(a.df1)) / (a.ssw / static_cast<double>(a.df2));
    t.p_value = f_upper_tail(t.statistic, static_cast<double>(a.df1), static_cast<double>(a.df2));
    return t;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw ValidationError("incomplete beta argument must lie in [0, 1]");
    return incomplete_beta(a, b, x, 1.0 - x);
}

double f_upper_tail(double f, double df1, double df2)
{
    if (!(df1 >= 1.0) || !(df2 >= 1.0))
        throw ValidationError("F distribution needs degrees of freedom >= 1");
    if (std::isnan(f))
        throw ValidationError("F statistic is NaN");
    if (f <= 0.0)
        return 1.0;
    if (std::isinf(f))
        return 0.0;
    const double denom = df2 + df1 * f;
    const double p = incomplete_beta(0.5 * df2, 0.5 * df1, df2 / denom, df1 * f / denom);
    return std::clamp(p, 0.0, 1.0);
}

TestReport anova_oneway(const std::vector<std::vector<double>>& groups)
{
    const auto a = sums_of_squares(groups);
    if (all_equal(a))
        throw ValidationError("all observations are identical; the F statistic is undefined");
    return finish(a);
}

TestReport levene(const std::vector<std::vector<double>>& groups, LeveneCenter center)
{
    std::vector<std::vector<double>> dev;
    dev.reserve(groups.size());
    for (const auto& g : groups) {
        if (g.empty())
            throw ValidationError("every group needs at least two observations");
        double c = 0.0;
        if (center == LeveneCenter::Median) {
            c = median(g);
        } else {
            for (double x : g)
                c += x;
            c /= static_cast<double>(g.size());
        }
        std::vector<double> z;
        z.reserve(g.size());
        for (double x : g)
            z.push_back(std::abs(x - c));
        dev.push_back(std::move(z));
    }
    const auto a = sums_of_squares(dev);
    TestReport t;
    if (all_equal(a)) {
        t.df1 = a.df1;
        t.df2 = a.df2;
        t.statistic = 0.0;
        t.p_value = 1.0;
    } else {
        t = finish(a);
    }
    t.center = center;
    return t;
}

} // namespace corrnet
