// Copyright 2026 The QERC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// High-precision spinodal oracle: dense scan plus golden section.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>

namespace qerc_test {

using big = boost::multiprecision::cpp_bin_float_50;

inline big big_g(big f, big x) {
    return 2 * (f * x + exp(-f * x) - 1) / (x * x);
}

inline big big_f(big x, big f) {
    const big g1 = big_g(1, x), ga = big_g(f, x), gb = big_g(1 - f, x);
    const big c = g1 - ga - gb;
    return g1 / (ga * gb - c * c / 4);
}

// Dense scan of F/2 on (0, 100] with step 1e-3, then golden section on the
// bracketing cell pair.
inline double oracle_spinodal(double f) {
    const auto obj = [f](double x) { return static_cast<double>(big_f(big(x), big(f))) / 2; };
    double best_x = 1e-3, best = obj(best_x);
    for (int i = 2; i <= 100000; ++i) {
        const double x = i * 1e-3;
        const double v = obj(x);
        if (v < best) best = v, best_x = x;
    }
    double a = best_x - 1e-3, b = best_x + 1e-3;
    const double r = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
        const double c = b - r * (b - a), d = a + r * (b - a);
        if (obj(c) < obj(d)) b = d;
        else a = c;
    }
    return obj(0.5 * (a + b));
}

}  // namespace qerc_test
