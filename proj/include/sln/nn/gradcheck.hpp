#ifndef SLN_NN_GRADCHECK_HPP_
#define SLN_NN_GRADCHECK_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "sln/common.hpp"

namespace sln::nn {

/// Central finite-difference verification of an analytic gradient.
/// Per-parameter error is reported relative to the gradient's max-norm, so a
/// small component with matching noise cannot mask or inflate the result:
///   rel_i = |analytic_i - numeric_i| / max(||analytic||_inf, ||numeric||_inf, 1e-8)
/// Returns the maximum over parameters.
inline double grad_check(const std::function<double(const std::vector<double>&)>& loss,
                         std::vector<double> params, const std::vector<double>& analytic,
                         double h = 1e-5) {
    require(params.size() == analytic.size(), "grad_check: ", params.size(), " params vs ",
            analytic.size(), " gradient entries");
    std::vector<double> numeric(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + h;
        const double up = loss(params);
        params[i] = keep - h;
        const double down = loss(params);
        params[i] = keep;
        numeric[i] = (up - down) / (2.0 * h);
    }
    double scale = 1e-8;
    for (size_t i = 0; i < params.size(); ++i) {
        scale = std::max(scale, std::abs(analytic[i]));
        scale = std::max(scale, std::abs(numeric[i]));
    }
    double worst = 0.0;
    for (size_t i = 0; i < params.size(); ++i)
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    return worst;
}

}  // namespace sln::nn

#endif  // SLN_NN_GRADCHECK_HPP_
