/***************************************************************************
   Copyright 2026 The abzero Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
****************************************************************************/
#ifndef ABZERO_COMMON_HPP_
#define ABZERO_COMMON_HPP_

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace abzero {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Invalid input to an otherwise well-defined operation.
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Point outside the domain of a special function (pole, degenerate lattice).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A series or product did not reach the requested tolerance.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent flux configuration.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Argument mapped into [0, 2pi).
inline double arg_2pi(cplx z)
{
    double a = std::arg(z);
    if (a < 0) a += 2 * pi;
    if (a >= 2 * pi) a = 0;
    return a;
}

// Ordering used for every enumerated point set: modulus, then argument.
inline bool modulus_arg_less(cplx a, cplx b)
{
    double ra = std::abs(a), rb = std::abs(b);
    if (ra != rb) return ra < rb;
    return arg_2pi(a) < arg_2pi(b);
}

// log sin(w), stable for large |Im w|.
inline cplx log_sin(cplx w)
{
    if (w.imag() > 1.0) {
        cplx e = std::exp(2.0 * I * w);
        return -I * w + std::log((1.0 - e) * I / 2.0);
    }
    if (w.imag() < -1.0) {
        cplx e = std::exp(-2.0 * I * w);
        return I * w + std::log((1.0 - e) / (2.0 * I));
    }
    return std::log(std::sin(w));
}

// cot(w), stable for large |Im w|.
inline cplx cot(cplx w)
{
    if (w.imag() > 1.0) {
        cplx e = std::exp(2.0 * I * w);
        return I * (1.0 + e) / (e - 1.0);
    }
    if (w.imag() < -1.0) {
        cplx e = std::exp(-2.0 * I * w);
        return I * (1.0 + e) / (1.0 - e);
    }
    return std::cos(w) / std::sin(w);
}

}  // namespace abzero

#endif
