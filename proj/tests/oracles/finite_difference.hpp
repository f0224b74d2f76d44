// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle
{

/// Central differences of f at x, one coordinate at a time.
inline std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = f(x);
        x[i] = saved - h;
        const double down = f(x);
        x[i] = saved;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Relative error with an absolute floor so near-zero components compare sensibly.
inline double relative_error(double a, double b, double floor = 1e-8)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

} // namespace oracle
