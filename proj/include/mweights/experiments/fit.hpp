#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mweights/core/error.hpp"
#include "mweights/experiments/sweep.hpp"

namespace mweights {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // root mean square of the log residuals
    double eps_min = 0.0;
    double eps_max = 0.0;
    std::size_t points = 0;

    nlohmann::json json() const
    {
        return {{"slope", slope}, {"intercept", intercept}, {"residual", residual}, {"eps_min", eps_min}, {"eps_max", eps_max}};
    }
};

/// Least squares y = slope x + intercept.
inline FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size())
        throw ConfigError("fit needs matching abscissae and ordinates");
    if (x.size() < 4)
        throw ConfigError("fit needs at least 4 points, got " + std::to_string(x.size()));
    const double k = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double spread = 0;
    for (double v : x)
        spread = std::max(spread, std::abs(v - mx));
    if (!(spread > 1e-12 * (1.0 + std::abs(mx))))
        throw ConfigError("degenerate abscissae: all x values coincide");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / k);
    f.points = x.size();
    return f;
}

namespace detail {

template <class X, class Y>
FitResult fit_rows(const std::vector<SweepRow>& rows, X xf, Y yf)
{
    std::vector<double> x, y;
    double lo = 1e300, hi = 0;
    for (const SweepRow& r : rows) {
        if (r.flagged)
            continue;
        if (!(r.ratio > 0) || !(r.ap_const > 0))
            throw ConfigError("fit needs positive rows");
        x.push_back(xf(r));
        y.push_back(yf(r));
        lo = std::min(lo, r.eps);
        hi = std::max(hi, r.eps);
    }
    FitResult f = fit_line(x, y);
    f.eps_min = lo;
    f.eps_max = hi;
    return f;
}

} // namespace detail

/// Slope of log(ratio) against log([w]_{A_P}); flagged rows are skipped.
inline FitResult fit_exponent(const std::vector<SweepRow>& rows)
{
    return detail::fit_rows(rows, [](const SweepRow& r) { return std::log(r.ap_const); },
                            [](const SweepRow& r) { return std::log(r.ratio); });
}

/// Slope of log([w]_{A_P}) against log(1/eps).
inline FitResult fit_ap_growth(const std::vector<SweepRow>& rows)
{
    return detail::fit_rows(rows, [](const SweepRow& r) { return -std::log(r.eps); },
                            [](const SweepRow& r) { return std::log(r.ap_const); });
}

/// Slope of log(ratio) against log(1/eps).
inline FitResult fit_ratio_growth(const std::vector<SweepRow>& rows)
{
    return detail::fit_rows(rows, [](const SweepRow& r) { return -std::log(r.eps); },
                            [](const SweepRow& r) { return std::log(r.ratio); });
}

inline void write_gnuplot(std::ostream& os, const std::string& csv_path, const FitResult& fit, const std::string& title)
{
    os << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set key top left\n"
       << "set title '" << title << "'\n"
       << "set xlabel 'A_P constant'\n"
       << "set ylabel 'norm ratio'\n"
       << "a = " << io::format_double(fit.slope) << "\n"
       << "b = " << io::format_double(fit.intercept) << "\n"
       << "fit_line(x) = exp(b) * x**a\n"
       << "plot '" << csv_path << "' every ::1 using 2:5 with linespoints pt 7 title 'sweep', \\\n"
       << "     fit_line(x) with lines dt 2 title sprintf('slope %.3f', a)\n";
}

} // namespace mweights
