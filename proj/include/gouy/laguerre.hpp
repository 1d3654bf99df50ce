#pragma once

#include <array>
#include <cmath>

#include "errors.hpp"

namespace gouy {

// Generalized Laguerre polynomial L_p^alpha(x) by the three-term recurrence
// (k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}.
inline double laguerre_poly(int p, int alpha, double x) {
    if (p < 0 || alpha < 0) throw invalid_input("laguerre_poly: degree and order must be non-negative");
    double prev = 1.0;
    if (p == 0) return prev;
    double curr = 1.0 + alpha - x;
    for (int k = 1; k < p; ++k) {
        const double next = ((2.0 * k + 1.0 + alpha - x) * curr - (k + alpha) * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

// log(n!); exact products up to 20!, lgamma above.
inline double log_factorial(int n) {
    if (n < 0) throw invalid_input("log_factorial: negative argument");
    if (n > 20) return std::lgamma(n + 1.0);
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return std::log(f);
}

}  // namespace gouy
